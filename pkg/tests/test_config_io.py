from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jcrlab import config, io

CONFIGS = Path(__file__).parent.parent / "configs"


def write(tmp_path, text):
    p = tmp_path / "c.toml"
    p.write_text(text)
    return p


def test_defaults_load():
    cfg = config.load()
    assert cfg == config.ExperimentConfig()
    assert cfg.train.optimizer == "adam"


def test_desk_config_matches_defaults():
    assert config.load(CONFIGS / "desk.toml") == config.ExperimentConfig()


def test_partial_table_keeps_other_defaults(tmp_path):
    cfg = config.load(write(tmp_path, "seed = 9\n[rmse]\nsnr_db = [0, 5]\n"))
    assert cfg.seed == 9
    assert cfg.rmse.snr_db == (0.0, 5.0)
    assert cfg.rmse.train_variations == config.RmseConfig().train_variations
    assert cfg.secrecy == config.SecrecyConfig()


def test_unknown_key_lists_accepted(tmp_path):
    with pytest.raises(config.ConfigError, match="accepted.*realizations"):
        config.load(write(tmp_path, "[secrecy]\nrealisations = 3\n"))
    with pytest.raises(config.ConfigError, match="unknown top-level"):
        config.load(write(tmp_path, "[plots]\ndpi = 3\n"))


@pytest.mark.parametrize("text", [
    "[secrecy]\nrealizations = 2.5\n",
    "[secrecy]\nrealizations = true\n",
    "[rmse]\nsnr_db = 3\n",
    "[rmse]\nshared_network = 1\n",
    "seed = 'x'\n",
    "secrecy = 3\n",
])
def test_type_errors(tmp_path, text):
    with pytest.raises(config.ConfigError):
        config.load(write(tmp_path, text))


@pytest.mark.parametrize("text,msg", [
    ("[rmse]\nn_snapshots = 4\n", "n_snapshots"),
    ("[secrecy]\nbob_nulling = 'some'\n", "bob_nulling"),
    ("[train]\noptimizer = 'lbfgs'\n", "optimizer"),
    ("[rmse]\nreceivers = ['sonar']\n", "receivers"),
    ("[train]\nvalidation_fraction = 1.0\n", "validation_fraction"),
    ("seed = -1\n", "seed"),
])
def test_validation_messages(tmp_path, text, msg):
    with pytest.raises(config.ConfigError, match=msg):
        config.load(write(tmp_path, text))


def test_bad_toml_and_missing_file(tmp_path):
    with pytest.raises(config.ConfigError, match="not valid TOML"):
        config.load(write(tmp_path, "[secrecy\n"))
    with pytest.raises(config.ConfigError, match="does not exist"):
        config.load(tmp_path / "nope.toml")


def test_table_round_trip(tmp_path):
    cols = ["name", "n", "x", "flag"]
    rows = [["a", 1, 0.5, True], {"name": "b", "n": 2, "x": float("nan"), "flag": False}]
    p = io.write_table(tmp_path / "t.csv", cols, rows, {"seed": 3})
    meta, back = io.read_table(p)
    assert meta == {"seed": "3"}
    assert back[0] == {"name": "a", "n": 1, "x": 0.5, "flag": 1}
    assert back[1]["n"] == 2 and np.isnan(back[1]["x"])


def test_table_text_is_stable():
    a = io.format_table(["x"], [[1 / 3], [np.float64(2 / 3)]])
    assert a == "x\n0.33333333\n0.66666667\n"


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 6), st.integers(0, 2**31))
def test_record_round_trip_is_exact(n_rx, t, seed):
    import tempfile

    rng = np.random.default_rng(seed)
    y = (rng.standard_normal((n_rx, t)) + 1j * rng.standard_normal((n_rx, t))) * 10.0 ** rng.uniform(-20, 5)
    with tempfile.TemporaryDirectory() as d:
        p = Path(d) / "r.txt"
        io.write_record(p, y)
        assert np.array_equal(io.read_record(p), y)


def test_record_rejects_bad_files(tmp_path):
    p = tmp_path / "r.txt"
    p.write_text("1 2\n")
    with pytest.raises(ValueError, match="header"):
        io.read_record(p)
    p.write_text("# receive-record n_rx=2 n_snapshots=1\n1 2\n")
    with pytest.raises(ValueError, match="expected"):
        io.read_record(p)
