"""Escape-time rasters of the flux-decimation maps (the gasket butterfly).

A grid point (alpha, lambda) is iterated under the three-parameter map
(alpha, beta, lambda) -> (alpha_down, beta_down, R) starting from beta = alpha
(or a fixed beta), and retained when the lambda-orbit stays below the escape
threshold for the full iteration budget.  The retained set over the diagonal
slice is the butterfly picture; the "U2" variant instead quadruples alpha and
ignores the angle correction.

Two engines produce bit-identical rasters: a pure-Python scalar loop and a
numpy-vectorized one.  Bit-identity is deliberate and fragile: powers are
written as explicit multiply chains (libm pow and numpy's integer-power path
round differently) and atan2 is always evaluated through math.atan2, because
numpy's vectorized arctan2 is off by an ulp often enough to flip near-threshold
cells after twenty amplifying iterations.  Keep it that way.

An exact |Psi| = 0 during iteration divides by zero in the raw update.  At
exactly-representable half-integer fluxes the singularity is removable and the
orbit continues through the exact quadratic route (apply_U); anywhere else the
orbit is terminated and the cell marked retained, with the event logged.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .decimation import OrbitTerminated, apply_U

log = logging.getLogger(__name__)

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class RasterConfig:
    grid_alpha: int = 301
    grid_lambda: int = 301
    lambda_min: float = 0.0
    lambda_max: float = 2.0
    threshold: float = 10.0
    max_iters: int = 20
    map: str = "U"
    beta_mode: str | float = "diagonal"

    def __post_init__(self):
        if self.grid_alpha < 2 or self.grid_lambda < 2:
            raise ValueError("grid must be at least 2x2")
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.map not in ("U", "U2"):
            raise ValueError(f"unknown map {self.map!r} (use U or U2)")
        if self.beta_mode != "diagonal" and not isinstance(self.beta_mode, (int, float)):
            raise ValueError("beta_mode is 'diagonal' or a number")

    @property
    def alphas(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.grid_alpha)

    @property
    def lambdas(self) -> np.ndarray:
        return np.linspace(self.lambda_min, self.lambda_max, self.grid_lambda)


@dataclass(frozen=True)
class Raster:
    config: RasterConfig
    retained: np.ndarray  # bool, shape (grid_alpha, grid_lambda)
    escape_iter: np.ndarray  # int32, -1 where retained

    @property
    def retained_count(self) -> int:
        return int(self.retained.sum())


def _continue_exact_zero(al: float, be: float, lmd: float) -> tuple[float, float, float] | None:
    """Orbit continuation through an exact |Psi| = 0 hit; None = terminate."""
    try:
        return apply_U(al, be, lmd)
    except OrbitTerminated:
        log.info("orbit terminated at exact Psi zero: alpha=%r beta=%r lambda=%r", al, be, lmd)
        return None


def _orbit_scalar(al: float, be: float, lmd: float, cfg: RasterConfig) -> tuple[bool, int]:
    """One cell, mirroring the reference loop order; returns (retained, escape_iter)."""
    th, num_iter, u2 = cfg.threshold, cfg.max_iters, cfg.map == "U2"
    count = 0
    while abs(lmd) < th:  # NaN fails this check, like the reference
        count += 1
        x = math.cos(TWO_PI * al)
        xs = math.sin(TWO_PI * al)
        y = math.cos(TWO_PI * be)
        ys = math.sin(TWO_PI * be)
        cab = x * y - xs * ys
        c2ab = (x * x - xs * xs) * y - 2 * xs * x * ys
        s2ab = 2 * xs * x * y + ys * (x * x - xs * xs)
        sab = xs * y + x * ys
        one_l = 1 - lmd
        a_val = 16 * lmd * lmd - (32 + 4 * x) * lmd + 15 + 4 * x + cab
        d_val = -(lmd * lmd * lmd) + 3 * lmd * lmd - 45 / 16 * lmd + 13 / 16 - y / 32
        re = one_l * one_l - 1 / 16 + one_l / 4 * (2 * x + c2ab) + 1 / 16 * (x * x - xs * xs + 2 * cab)
        im = -one_l / 4 * (2 * xs + s2ab) - 1 / 16 * (2 * x * xs + 2 * sab)
        theta = math.atan2(im, re)
        if count == num_iter:
            return True, -1
        den = 16 * math.sqrt(re * re + im * im)
        if den == 0.0:
            nxt = _continue_exact_zero(al, be, lmd)
            if nxt is None:
                return True, -1
            if u2:
                lmd = nxt[2]
                al = (4 * al) % 1.0
                if cfg.beta_mode == "diagonal":
                    be = al
            else:
                al, be, lmd = nxt
            continue
        num = a_val - 64 * d_val * one_l
        lmd = 1 + num / den
        if u2:
            al = (4 * al) % 1.0
            if cfg.beta_mode == "diagonal":
                be = al
        else:
            al_d, be_d = al, be
            al = (3 * al_d + be_d + 3 * theta / 2 / math.pi) % 1.0
            be = (3 * be_d + al_d - 3 * theta / 2 / math.pi) % 1.0
    return False, count


def _render_scalar(cfg: RasterConfig) -> Raster:
    alphas = [float(a) for a in cfg.alphas]
    lambdas = [float(v) for v in cfg.lambdas]
    beta0 = None if cfg.beta_mode == "diagonal" else float(cfg.beta_mode)
    retained = np.zeros((cfg.grid_alpha, cfg.grid_lambda), dtype=bool)
    esc = np.full((cfg.grid_alpha, cfg.grid_lambda), -1, dtype=np.int32)
    for i, a in enumerate(alphas):
        b = a if beta0 is None else beta0
        for j, l in enumerate(lambdas):
            ok, it = _orbit_scalar(a, b, l, cfg)
            retained[i, j] = ok
            esc[i, j] = it
    return Raster(cfg, retained, esc)


def _atan2_exact(im: np.ndarray, re: np.ndarray) -> np.ndarray:
    # math.atan2 per element: numpy's arctan2 is not bit-identical to libm here
    out = np.empty_like(im)
    at = math.atan2
    for k in range(im.shape[0]):
        out[k] = at(im[k], re[k])
    return out


def _render_vector_block(cfg: RasterConfig, alphas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ga, gl = alphas.shape[0], cfg.grid_lambda
    n = ga * gl
    al = np.repeat(alphas, gl)
    be = np.full(n, float(cfg.beta_mode)) if cfg.beta_mode != "diagonal" else al.copy()
    lmd = np.tile(cfg.lambdas, ga)
    th, num_iter, u2 = cfg.threshold, cfg.max_iters, cfg.map == "U2"

    esc = np.full(n, -1, dtype=np.int32)
    alive = np.ones(n, dtype=bool)
    term_retained = np.zeros(n, dtype=bool)  # orbit terminated at exact Psi zero

    with np.errstate(all="ignore"):
        for k in range(num_iter):
            checking = alive & ~term_retained
            bad = np.zeros(n, dtype=bool)
            bad[checking] = ~(np.abs(lmd[checking]) < th)
            esc[bad] = k
            alive &= ~bad
            if k == num_iter - 1:
                break
            idx = np.flatnonzero(alive & ~term_retained)
            if idx.size == 0:
                break
            a = al[idx]
            b = be[idx]
            l = lmd[idx]
            x = np.cos(TWO_PI * a)
            xs = np.sin(TWO_PI * a)
            y = np.cos(TWO_PI * b)
            ys = np.sin(TWO_PI * b)
            cab = x * y - xs * ys
            c2ab = (x * x - xs * xs) * y - 2 * xs * x * ys
            s2ab = 2 * xs * x * y + ys * (x * x - xs * xs)
            sab = xs * y + x * ys
            one_l = 1 - l
            a_val = 16 * l * l - (32 + 4 * x) * l + 15 + 4 * x + cab
            d_val = -(l * l * l) + 3 * l * l - 45 / 16 * l + 13 / 16 - y / 32
            re = one_l * one_l - 1 / 16 + one_l / 4 * (2 * x + c2ab) + 1 / 16 * (x * x - xs * xs + 2 * cab)
            im = -one_l / 4 * (2 * xs + s2ab) - 1 / 16 * (2 * x * xs + 2 * sab)
            den = 16 * np.sqrt(re * re + im * im)
            num = a_val - 64 * d_val * one_l
            zero = den == 0.0
            lmd_new = np.empty_like(l)
            np.divide(num, den, out=lmd_new, where=~zero)
            lmd_new[~zero] += 1.0
            if u2:
                al_new = (4 * a) % 1.0
                be_new = al_new if cfg.beta_mode == "diagonal" else b
            else:
                theta = _atan2_exact(im, re)
                al_new = (3 * a + b + 3 * theta / 2 / math.pi) % 1.0
                be_new = (3 * b + a - 3 * theta / 2 / math.pi) % 1.0
            if zero.any():
                for pos in np.flatnonzero(zero):
                    nxt = _continue_exact_zero(float(a[pos]), float(b[pos]), float(l[pos]))
                    if nxt is None:
                        term_retained[idx[pos]] = True
                        lmd_new[pos] = l[pos]
                        al_new[pos], be_new[pos] = a[pos], b[pos]
                    else:
                        al_new[pos], be_new[pos], lmd_new[pos] = nxt
                        if u2:
                            al_new[pos] = (4 * a[pos]) % 1.0
                            if cfg.beta_mode == "diagonal":
                                be_new[pos] = al_new[pos]
            al[idx] = al_new
            be[idx] = be_new
            lmd[idx] = lmd_new

    retained = alive | term_retained
    esc[retained] = -1
    return retained.reshape(ga, gl), esc.reshape(ga, gl)


def render(config: RasterConfig, engine: str = "vector", threads: int = 1) -> Raster:
    """Rasterize the filled-orbit set; engines and thread counts agree bitwise."""
    if engine == "scalar":
        return _render_scalar(config)
    if engine != "vector":
        raise ValueError(f"unknown engine {engine!r} (use vector or scalar)")
    alphas = config.alphas
    if threads <= 1:
        ret, esc = _render_vector_block(config, alphas)
        return Raster(config, ret, esc)
    blocks = np.array_split(np.arange(config.grid_alpha), min(threads, config.grid_alpha))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda ix: _render_vector_block(config, alphas[ix]), blocks))
    ret = np.concatenate([p[0] for p in parts], axis=0)
    esc = np.concatenate([p[1] for p in parts], axis=0)
    return Raster(config, ret, esc)


def write_raster(raster: Raster, format: str, path: str) -> None:
    """PGM (binary P5, black = retained, top row = lambda_max) or CSV export."""
    fmt = format.lower()
    try:
        if fmt == "pgm":
            ga, gl = raster.retained.shape
            # image rows scan lambda from max down to min; columns scan alpha
            img = np.where(raster.retained.T[::-1], 0, 255).astype(np.uint8)
            with open(path, "wb") as fh:
                fh.write(f"P5\n{ga} {gl}\n255\n".encode("ascii"))
                fh.write(img.tobytes())
        elif fmt == "csv":
            cfg = raster.config
            with open(path, "w") as fh:
                fh.write("alpha,lambda,retained,escape_iter\n")
                for i, a in enumerate(cfg.alphas):
                    for j, l in enumerate(cfg.lambdas):
                        it = raster.escape_iter[i, j]
                        fh.write(
                            f"{float(a)!r},{float(l)!r},{int(raster.retained[i, j])},"
                            f"{'' if it < 0 else int(it)}\n"
                        )
        else:
            raise ValueError(f"unknown raster format {format!r} (use pgm or csv)")
    except OSError as exc:
        raise OSError(f"cannot write raster to {path}: {exc}") from exc
