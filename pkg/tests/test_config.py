"""Configuration parsing, precedence, and hashing."""
import pytest

from soccersum.config import KNOWN_KEYS, PipelineConfig, load_config
from soccersum.core import ConfigError


def test_defaults_present():
    cfg = PipelineConfig()
    assert cfg["seed"] == 7
    assert cfg["gen.matches"] == 60
    assert cfg["stage3.sigma"] == 0.05
    assert cfg["stage1.literal_lse"] is False
    assert cfg["eval.kfold"] == 10


def test_set_parses_strings_by_declared_type():
    cfg = PipelineConfig()
    cfg.set("stage1.hidden", "24")
    assert cfg["stage1.hidden"] == 24
    cfg.set("stage3.sigma", "0.5")
    assert cfg["stage3.sigma"] == 0.5
    for raw, want in [("true", True), ("1", True), ("yes", True),
                      ("false", False), ("0", False), ("no", False)]:
        cfg.set("stage1.literal_lse", raw)
        assert cfg["stage1.literal_lse"] is want


def test_bad_values_and_unknown_keys_rejected():
    cfg = PipelineConfig()
    with pytest.raises(ConfigError):
        cfg.set("stage1.hidden", "many")
    with pytest.raises(ConfigError):
        cfg.set("stage1.literal_lse", "maybe")
    with pytest.raises(ConfigError):
        cfg.set("stage1.hiden", 16)
    with pytest.raises(ConfigError):
        cfg["no.such.key"]


def test_file_parsing_with_comments_and_include(tmp_path):
    base = tmp_path / "base.cfg"
    base.write_text("# shared settings\n\ngen.matches = 12\nstage1.epochs = 3\n")
    main = tmp_path / "main.cfg"
    main.write_text("include base.cfg\nstage1.epochs = 5\nseed = 11\n")
    cfg = load_config(str(main), use_env=False)
    assert cfg["gen.matches"] == 12
    assert cfg["stage1.epochs"] == 5  # later assignment wins over the include
    assert cfg["seed"] == 11


def test_include_cycle_detected(tmp_path):
    a = tmp_path / "a.cfg"
    b = tmp_path / "b.cfg"
    a.write_text("include b.cfg\n")
    b.write_text("include a.cfg\n")
    with pytest.raises(ConfigError, match="cycle"):
        load_config(str(a), use_env=False)


def test_file_errors_name_the_location(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("seed = 7\nthis line has no equals\n")
    with pytest.raises(ConfigError, match="bad.cfg:2"):
        load_config(str(p), use_env=False)
    p.write_text("gen.matches = lots\n")
    with pytest.raises(ConfigError, match="bad.cfg:1"):
        load_config(str(p), use_env=False)
    with pytest.raises(ConfigError, match="does not exist"):
        load_config(str(tmp_path / "missing.cfg"), use_env=False)


def test_env_and_overrides_precedence(tmp_path, monkeypatch):
    p = tmp_path / "c.cfg"
    p.write_text("gen.matches = 20\nstage1.epochs = 9\n")
    monkeypatch.setenv("SOCCERSUM_GEN_MATCHES", "30")
    monkeypatch.setenv("SOCCERSUM_STAGE3_SIGMA", "0.25")
    cfg = load_config(str(p), overrides={"gen.matches": 40})
    assert cfg["gen.matches"] == 40      # explicit override beats env beats file
    assert cfg["stage3.sigma"] == 0.25   # env beats default
    assert cfg["stage1.epochs"] == 9     # file beats default


def test_apply_env_uses_given_mapping():
    cfg = PipelineConfig()
    cfg.apply_env({"SOCCERSUM_SEED": "99", "UNRELATED": "x"})
    assert cfg["seed"] == 99


def test_config_hash_identifies_the_experiment():
    a = PipelineConfig()
    b = PipelineConfig()
    assert a.config_hash() == b.config_hash()
    b.set("jobs", 8)
    # worker count is excluded from the identity on purpose
    assert a.config_hash() == b.config_hash()
    b.set("stage3.sigma", 0.2)
    assert a.config_hash() != b.config_hash()
    assert len(a.config_hash()) == 12


def test_canonical_lists_every_key_except_jobs():
    cfg = PipelineConfig()
    canon = cfg.canonical()
    for key in KNOWN_KEYS:
        if key == "jobs":
            assert "\njobs" not in canon and not canon.startswith("jobs")
        else:
            assert key + " = " in canon


def test_typed_subconfig_builders():
    cfg = PipelineConfig({"stage1.window": 12, "stage2.lr": 0.01,
                          "gen.audio_gain": 5.0, "pad.pre": 2.0})
    assert cfg.mil_config().window == 12
    assert cfg.hma_config().lr == 0.01
    gen = cfg.gen_config()
    assert gen.audio_gain == 5.0
    assert gen.pad_pre == 2.0
    assert gen.padding().pre == 2.0
