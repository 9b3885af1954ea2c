"""Flat key = value run configuration.

The file format is UTF-8 text, one ``key = value`` pair per line, ``#``
starts a comment.  Every key has a default so an empty (or absent) file is
a valid configuration.  Validation failures name the offending key.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from .params import ModelParams


class ConfigError(ValueError):
    """Bad key, bad value, or unreadable config file."""


@dataclass
class RunConfig:
    alpha: float = 0.5
    alpha_tilde: float = 0.5
    eta: float = 1.0
    rho: float = 1.0
    n_cells: int = 400
    n_modes: int = 200
    T: float = 10.0
    dt: float = 1e-3
    stride: int = 10
    k_min: int = 5
    k_max: int = 60
    beta_min: float = 1e2
    beta_max: float = 1e4
    lambda_min: float = 0.05
    lambda_max: float = 1e4
    cert_tol: float = 1e-4
    profile: str = "gaussian"
    fit_model: str = "auto"      # auto | polynomial | exponential
    out_dir: str = "out"
    seed: int = 0
    threads: int = 0             # 0 = leave BLAS pools alone
    figures: bool = True

    def validate(self) -> None:
        def fail(key, msg):
            raise ConfigError(f"invalid value for '{key}': {msg}")

        if not 0.0 < self.alpha < 1.0:
            fail("alpha", f"must lie in (0, 1), got {self.alpha}")
        if not 0.0 < self.alpha_tilde <= 1.0:
            fail("alpha_tilde", f"must lie in (0, 1], got {self.alpha_tilde}")
        if self.eta < 0.0:
            fail("eta", f"must be >= 0, got {self.eta}")
        if self.rho < 0.0:
            fail("rho", f"must be >= 0, got {self.rho}")
        if self.n_cells < 16:
            fail("n_cells", f"must be >= 16, got {self.n_cells}")
        if self.n_modes < 8:
            fail("n_modes", f"must be >= 8, got {self.n_modes}")
        if self.T <= 0.0:
            fail("T", f"must be positive, got {self.T}")
        if self.dt <= 0.0:
            fail("dt", f"must be positive, got {self.dt}")
        if self.stride < 1:
            fail("stride", f"must be >= 1, got {self.stride}")
        if not 1 <= self.k_min <= self.k_max <= 500:
            fail("k_min", f"need 1 <= k_min <= k_max <= 500, got "
                          f"{self.k_min}..{self.k_max}")
        if not 0.0 < self.beta_min < self.beta_max:
            fail("beta_min", f"need 0 < beta_min < beta_max, got "
                             f"[{self.beta_min}, {self.beta_max}]")
        if not 0.0 < self.lambda_min < self.lambda_max:
            fail("lambda_min", f"need 0 < lambda_min < lambda_max, got "
                               f"[{self.lambda_min}, {self.lambda_max}]")
        if self.cert_tol <= 0.0:
            fail("cert_tol", f"must be positive, got {self.cert_tol}")
        if self.fit_model not in ("auto", "polynomial", "exponential"):
            fail("fit_model", f"unknown model {self.fit_model!r}")
        if self.seed < 0:
            fail("seed", f"must be >= 0, got {self.seed}")
        if self.threads < 0:
            fail("threads", f"must be >= 0, got {self.threads}")
        builtin = ("gaussian", "lowest_mode", "polynomial")
        if self.profile not in builtin and not self.profile.endswith(".csv"):
            fail("profile", f"expected one of {builtin} or a .csv path, "
                            f"got {self.profile!r}")

    def model_params(self) -> ModelParams:
        return ModelParams(alpha=self.alpha, alpha_tilde=self.alpha_tilde,
                           eta=self.eta, rho=self.rho)

    def header_items(self):
        """(key, value) pairs recorded in every output header."""
        return [(f.name, getattr(self, f.name)) for f in fields(self)]


_BOOL = {"true": True, "yes": True, "1": True,
         "false": False, "no": False, "0": False}


def parse_config(path: str | None, overrides: dict | None = None) -> RunConfig:
    """Load a config file (optional) and apply CLI overrides, then validate."""
    cfg = RunConfig()
    known = {f.name: f.type for f in fields(cfg)}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                lines = fh.readlines()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path!r}: {exc}")
        for lineno, raw in enumerate(lines, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(
                    f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in known:
                raise ConfigError(f"{path}:{lineno}: unknown key '{key}'")
            setattr(cfg, key, _coerce(key, value, getattr(cfg, key)))
    for key, value in (overrides or {}).items():
        if value is not None:
            setattr(cfg, key, value)
    cfg.validate()
    return cfg


def _coerce(key: str, text: str, current):
    try:
        if isinstance(current, bool):
            lowered = text.lower()
            if lowered not in _BOOL:
                raise ValueError(f"not a boolean: {text!r}")
            return _BOOL[lowered]
        if isinstance(current, int):
            return int(text)
        if isinstance(current, float):
            return float(text)
        return text
    except ValueError as exc:
        raise ConfigError(f"invalid value for '{key}': {exc}")
