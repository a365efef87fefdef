from .kernels import (  # noqa: F401
    HAS_NUMBA,
    lstm_backward,
    lstm_backward_numpy,
    lstm_forward,
    lstm_forward_numpy,
    numba_enabled,
)
from .layers import (  # noqa: F401
    bce_loss,
    bce_sigmoid_grad,
    maxpool_time,
    maxpool_time_backward,
    sigmoid,
    softmax,
    softmax_backward,
)
from .optim import Adam  # noqa: F401
from .params import (  # noqa: F401
    dense_init,
    load_checkpoint,
    lstm_init,
    save_checkpoint,
    uniform_init,
    vector_init,
)
