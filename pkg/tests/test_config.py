import json
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from tptail.config import (
    SEED_ENV,
    ConfigError,
    build_ensemble,
    default_seed,
    from_dict,
    load_config,
    parse_config,
    render_config,
)
from tptail.ensembles import BoundedTpsdEnsemble, SeriesEnsemble
from tptail.tensor import DenseTensor3, identity, save_tensor

DATA = Path(__file__).resolve().parents[1] / "src" / "tptail" / "data"


def base(**over):
    d = {
        "theorem_id": "gaussian-series",
        "ensemble": {"kind": "series", "params": {"variable_kind": "rademacher"},
                     "coefficient_files": ["a.txt"]},
        "thresholds": [0.5, 1.0],
        "trials": 100,
        "alpha": 0.05,
        "seed": 3,
    }
    d.update(over)
    return d


def test_shipped_demo_config_loads():
    cfg = load_config(DATA / "rademacher_scalar_demo.json")
    assert cfg.theorem_id == "gaussian-series"
    assert cfg.thresholds == (0.5, 1.0, 1.5, 2.0)
    ens = build_ensemble(cfg)
    assert isinstance(ens, SeriesEnsemble) and ens.sigma2 == pytest.approx(1.0)


def test_render_parse_identity():
    cfg = from_dict(base(thresholds=[0.5, [1.0, 2.0]], output="out.csv"))
    text = render_config(cfg)
    again = parse_config(text)
    assert again == cfg
    assert render_config(again) == text


@settings(max_examples=60, deadline=None)
@given(
    thresholds=st.lists(st.one_of(st.floats(-1e3, 1e3, allow_nan=False),
                                  st.lists(st.floats(0, 1e3), min_size=1, max_size=4)), max_size=6),
    trials=st.integers(1, 10**6),
    alpha=st.floats(1e-6, 0.999),
    seed=st.one_of(st.none(), st.integers(0, 2**63)),
    kind=st.sampled_from(["bounded-tpsd", "centered-bounded"]),
    n_sum=st.integers(1, 20),
)
def test_round_trip_property(thresholds, trials, alpha, seed, kind, n_sum):
    d = {"theorem_id": "chernoff2-upper", "ensemble": {"kind": kind, "params": {"m": 2, "p": 2, "n_sum": n_sum}},
         "thresholds": thresholds, "trials": trials, "alpha": alpha}
    if seed is not None:
        d["seed"] = seed
    cfg = from_dict(d)
    assert parse_config(render_config(cfg)) == cfg


@pytest.mark.parametrize("mutate, msg", [
    (lambda d: d.update(extra=1), "unknown key"),
    (lambda d: d["ensemble"].update(colour="red"), "unknown key"),
    (lambda d: d["ensemble"]["params"].update(bogus=1), "unknown key"),
    (lambda d: d.pop("ensemble"), "missing"),
    (lambda d: d["ensemble"].update(kind="wishart"), "kind"),
    (lambda d: d.update(trials=0), "trials"),
    (lambda d: d.update(alpha=1.5), "alpha"),
    (lambda d: d.update(seed=-1), "seed"),
    (lambda d: d.update(thresholds=["x"]), "threshold"),
    (lambda d: d["ensemble"].pop("coefficient_files"), "coefficient files"),
])
def test_invalid_configs(mutate, msg):
    d = base()
    mutate(d)
    with pytest.raises(ConfigError, match=msg):
        from_dict(d)


def test_invalid_json():
    with pytest.raises(ConfigError, match="JSON"):
        parse_config("{not json")


def test_non_hermitian_coefficient_named(tmp_path):
    save_tensor(DenseTensor3([[[1.0], [2.0]], [[0.0], [1.0]]]), tmp_path / "bad.txt")
    d = base()
    d["ensemble"]["coefficient_files"] = ["bad.txt"]
    (tmp_path / "c.json").write_text(json.dumps(d))
    with pytest.raises(ConfigError, match="bad.txt is not Hermitian"):
        build_ensemble(load_config(tmp_path / "c.json"))


def test_missing_coefficient_file(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps(base()))
    with pytest.raises(ConfigError, match="cannot read"):
        build_ensemble(load_config(tmp_path / "c.json"))


def test_build_bounded(tmp_path):
    cfg = from_dict({"theorem_id": "chernoff2-upper",
                     "ensemble": {"kind": "bounded-tpsd", "params": {"m": 2, "p": 3, "n_sum": 4, "law": "point"}}})
    ens = build_ensemble(cfg)
    assert isinstance(ens, BoundedTpsdEnsemble) and ens.n_sum == 4
    bad = from_dict({"theorem_id": "chernoff2-upper",
                     "ensemble": {"kind": "bounded-tpsd", "params": {"m": 2, "p": 3, "n_sum": 4, "law": "cauchy"}}})
    with pytest.raises(ConfigError, match="invalid bounded-tpsd"):
        build_ensemble(bad)


def test_default_seed_env(monkeypatch):
    monkeypatch.delenv(SEED_ENV, raising=False)
    assert default_seed() == 0
    monkeypatch.setenv(SEED_ENV, "42")
    assert default_seed() == 42
    assert from_dict(base(seed=None)).resolved_seed() == 42
    assert from_dict(base()).resolved_seed() == 3
    monkeypatch.setenv(SEED_ENV, "abc")
    with pytest.raises(ConfigError):
        default_seed()
