"""Adam optimizer over named parameter dicts."""
from __future__ import annotations

import numpy as np

from ..core import TrainingError


class Adam:
    """Bias-corrected Adam.

    Update: m <- b1*m + (1-b1)*g ; v <- b2*v + (1-b2)*g^2 ;
    p <- p - lr * (m/(1-b1^t)) / (sqrt(v/(1-b2^t)) + eps).
    """

    def __init__(self, params: dict, lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict, grads: dict) -> None:
        """Apply one update in place.  Parameters without a gradient entry
        are left untouched; non-finite gradients abort training."""
        self.t += 1
        b1t = 1.0 - self.beta1 ** self.t
        b2t = 1.0 - self.beta2 ** self.t
        for name, g in grads.items():
            if name not in params:
                raise TrainingError("gradient for unknown parameter %r" % name)
            if not np.all(np.isfinite(g)):
                raise TrainingError("non-finite gradient in parameter %r" % name)
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * np.square(g)
            params[name] -= self.lr * (m / b1t) / (np.sqrt(v / b2t) + self.eps)
