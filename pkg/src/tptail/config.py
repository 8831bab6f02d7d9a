"""JSON experiment configs for ``tptail simulate``.

Example::

    {
      "theorem_id": "gaussian-series",
      "ensemble": {
        "kind": "series",
        "params": {"variable_kind": "rademacher"},
        "coefficient_files": ["scalar_one.txt"]
      },
      "thresholds": [0.5, 1.0, 1.5, 2.0],
      "trials": 10000,
      "alpha": 0.01,
      "seed": 7,
      "output": "demo.csv"
    }

Coefficient files use the tensor literal format and are resolved relative
to the config file.  Unknown keys are rejected at every level.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from .ensembles import (
    BoundedTpsdEnsemble,
    CenteredBoundedEnsemble,
    Ensemble,
    HadamardGaussianEnsemble,
    MartingaleEnsemble,
    McDiarmidEnsemble,
    SeriesEnsemble,
)
from .spectral import is_hermitian
from .tensor import load_tensor

SEED_ENV = "TPTAIL_SEED"


class ConfigError(ValueError):
    """Invalid experiment configuration."""


# kind -> (allowed params, needs coefficient files, coefficients must be Hermitian)
ENSEMBLE_KINDS: Dict[str, Tuple[Tuple[str, ...], bool, bool]] = {
    "series": (("variable_kind", "rectangular"), True, False),
    "hadamard": (("sigma2_mode",), True, False),
    "bounded-tpsd": (("m", "p", "n_sum", "T", "law", "q", "scale_low", "basis_seed"), False, False),
    "centered-bounded": (("m", "p", "n_sum", "T", "law", "q", "scale_low", "basis_seed"), False, False),
    "martingale": (("damping",), True, True),
    "mcdiarmid": ((), True, True),
}

TOP_KEYS = ("theorem_id", "ensemble", "thresholds", "trials", "alpha", "seed", "output")
ENSEMBLE_KEYS = ("kind", "params", "coefficient_files")

Threshold = Union[float, Tuple[float, ...]]


@dataclass(frozen=True)
class EnsembleConfig:
    kind: str
    params: Dict[str, Any] = field(default_factory=dict)
    coefficient_files: Tuple[str, ...] = ()

    def to_dict(self) -> dict:
        out: Dict[str, Any] = {"kind": self.kind}
        if self.params:
            out["params"] = dict(self.params)
        if self.coefficient_files:
            out["coefficient_files"] = list(self.coefficient_files)
        return out


@dataclass(frozen=True)
class ExperimentConfig:
    theorem_id: str
    ensemble: EnsembleConfig
    thresholds: Tuple[Threshold, ...] = ()
    trials: int = 10_000
    alpha: float = 0.01
    seed: Optional[int] = None
    output: Optional[str] = None
    base_dir: Path = field(default=Path("."), compare=False)

    def to_dict(self) -> dict:
        out: Dict[str, Any] = {
            "theorem_id": self.theorem_id,
            "ensemble": self.ensemble.to_dict(),
            "thresholds": [list(t) if isinstance(t, tuple) else t for t in self.thresholds],
            "trials": self.trials,
            "alpha": self.alpha,
        }
        if self.seed is not None:
            out["seed"] = self.seed
        if self.output is not None:
            out["output"] = self.output
        return out

    def resolved_seed(self) -> int:
        return self.seed if self.seed is not None else default_seed()

    def output_path(self) -> Optional[Path]:
        return None if self.output is None else self.base_dir / self.output


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _reject_unknown(obj: dict, allowed, where: str):
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _expect(cond: bool, message: str):
    if not cond:
        raise ConfigError(message)


def _number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def from_dict(data: dict, base_dir: Union[str, Path] = ".") -> ExperimentConfig:
    _expect(isinstance(data, dict), "config must be a JSON object")
    _reject_unknown(data, TOP_KEYS, "config")
    for key in ("theorem_id", "ensemble"):
        _expect(key in data, f"config is missing {key!r}")
    _expect(isinstance(data["theorem_id"], str), "theorem_id must be a string")

    ens = data["ensemble"]
    _expect(isinstance(ens, dict), "ensemble must be an object")
    _reject_unknown(ens, ENSEMBLE_KEYS, "ensemble")
    kind = ens.get("kind")
    _expect(kind in ENSEMBLE_KINDS, f"ensemble kind must be one of {sorted(ENSEMBLE_KINDS)}, got {kind!r}")
    allowed, needs_files, _ = ENSEMBLE_KINDS[kind]
    params = ens.get("params", {})
    _expect(isinstance(params, dict), "ensemble params must be an object")
    _reject_unknown(params, allowed, f"{kind} params")
    files = ens.get("coefficient_files", [])
    _expect(isinstance(files, list) and all(isinstance(f, str) for f in files),
            "coefficient_files must be a list of paths")
    _expect(bool(files) == needs_files,
            f"{kind} ensembles {'need' if needs_files else 'take no'} coefficient files")

    thresholds = []
    for t in data.get("thresholds", []):
        if isinstance(t, list):
            _expect(t and all(_number(v) for v in t), f"bad threshold vector {t!r}")
            thresholds.append(tuple(float(v) for v in t))
        else:
            _expect(_number(t), f"bad threshold {t!r}")
            thresholds.append(float(t))

    trials = data.get("trials", 10_000)
    _expect(isinstance(trials, int) and not isinstance(trials, bool) and trials >= 1,
            "trials must be a positive integer")
    alpha = data.get("alpha", 0.01)
    _expect(_number(alpha) and 0.0 < alpha < 1.0, "alpha must lie in (0, 1)")
    seed = data.get("seed")
    _expect(seed is None or (isinstance(seed, int) and not isinstance(seed, bool) and seed >= 0),
            "seed must be a nonnegative integer")
    output = data.get("output")
    _expect(output is None or isinstance(output, str), "output must be a path string")

    return ExperimentConfig(
        theorem_id=data["theorem_id"],
        ensemble=EnsembleConfig(kind, dict(params), tuple(files)),
        thresholds=tuple(thresholds),
        trials=trials,
        alpha=float(alpha),
        seed=seed,
        output=output,
        base_dir=Path(base_dir),
    )


def parse_config(text: str, base_dir: Union[str, Path] = ".") -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    return from_dict(data, base_dir)


def render_config(cfg: ExperimentConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2) + "\n"


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, path.parent)


def build_ensemble(cfg: ExperimentConfig) -> Ensemble:
    """Instantiate the configured ensemble, loading and validating coefficient files."""
    ens = cfg.ensemble
    _, _, need_hermitian = ENSEMBLE_KINDS[ens.kind]
    tensors = []
    for name in ens.coefficient_files:
        path = cfg.base_dir / name
        try:
            t = load_tensor(path)
        except OSError as exc:
            raise ConfigError(f"cannot read coefficient file {path}: {exc.strerror}") from None
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        hermitian_path = need_hermitian or (ens.kind == "series" and not ens.params.get("rectangular", False)
                                            and t.is_square)
        if hermitian_path and (not t.is_square or not is_hermitian(t)):
            raise ConfigError(f"coefficient tensor {path} is not Hermitian")
        tensors.append(t)
    p = ens.params
    try:
        if ens.kind == "series":
            return SeriesEnsemble(tensors, p.get("variable_kind", "gaussian"), bool(p.get("rectangular", False)))
        if ens.kind == "hadamard":
            _expect(len(tensors) == 1, "hadamard ensembles take exactly one coefficient file")
            return HadamardGaussianEnsemble(tensors[0], p.get("sigma2_mode", "all-slices"))
        if ens.kind in ("bounded-tpsd", "centered-bounded"):
            cls = BoundedTpsdEnsemble if ens.kind == "bounded-tpsd" else CenteredBoundedEnsemble
            _expect(all(k in p for k in ("m", "p", "n_sum")), f"{ens.kind} needs params m, p, n_sum")
            return cls(**p)
        if ens.kind == "martingale":
            return MartingaleEnsemble(tensors, p.get("damping", 1.0))
        return McDiarmidEnsemble(tensors)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid {ens.kind} ensemble: {exc}") from None
