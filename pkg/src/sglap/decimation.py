"""Scalar machinery of spectral decimation at arbitrary flux.

Everything here is a plain function of (alpha, beta, lambda): the quartic A,
the cubic D (determinant of one 3x3 cell of the midpoint block), the complex
coupling Psi, the flux shift theta = arg(Psi)/2pi, the renormalized eigenvalue
map R, the spectral-similarity prefactor phi, and the one-step flux evolution
(alpha, beta) -> (3a+b+3theta, 3b+a-3theta).

`classify` sorts a triple (alpha, beta, lambda) into the multiplicity-transfer
case used by the enumerator: which of Psi and D vanish, the root multiplicity
of D, and — for simple D roots with Psi != 0 — whether the decimation limit
(1/|Psi(x)|) * D(x) (lambda-x)/(R(lambda)-R(x)) vanishes or cancels.  The
actual multiplicity bookkeeping lives in the enumerator module.

Conventions: fluxes in turns, reduced mod 1; dyadic means within 1e-12 of
{0, 1/2}.  R and phi are carried as None (never NaN) when undefined.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gauge import FluxPair, circ_dist, mod1

DYADIC_TOL = 1e-12
DEDUP_TOL = 1e-10


class OrbitTerminated(Exception):
    """Psi = 0: theta and hence the renormalization map are undefined here."""


def quartic_a(alpha: float, beta: float, lam: float) -> float:
    c_a = np.cos(2 * np.pi * alpha)
    c_ab = np.cos(2 * np.pi * (alpha + beta))
    return 16 * lam**2 - (32 + 4 * c_a) * lam + 15 + 4 * c_a + c_ab


def cell_cubic_d(beta: float, lam: float) -> float:
    """det of one midpoint 3x3 block: (1-lam)^3 - (3/16)(1-lam) - cos(2 pi beta)/32."""
    return -(lam**3) + 3 * lam**2 - (45 / 16) * lam + 13 / 16 - np.cos(2 * np.pi * beta) / 32


def coupling_psi(alpha: float, beta: float, lam: float) -> complex:
    e = lambda t: np.exp(-2j * np.pi * t)
    return (
        (1 - lam) ** 2
        - 1 / 16
        + ((1 - lam) / 4) * (2 * e(alpha) + e(2 * alpha + beta))
        + (1 / 16) * (e(2 * alpha) + 2 * e(alpha + beta))
    )


def coupling_psi_dlam(alpha: float, beta: float, lam: float) -> complex:
    e = lambda t: np.exp(-2j * np.pi * t)
    return -2 * (1 - lam) - (2 * e(alpha) + e(2 * alpha + beta)) / 4


def _is_dyadic(x: float, tol: float = DYADIC_TOL) -> bool:
    return circ_dist(x, 0.0) <= tol or circ_dist(x, 0.5) <= tol


@dataclass(frozen=True)
class DecimationStep:
    flux: FluxPair
    lam: float
    A: float
    D: float
    Psi: complex
    absPsi: float
    theta: float
    R: float | None
    phi: float | None
    alpha_down: float
    beta_down: float


def decimation_kit(flux: FluxPair, lam: float) -> DecimationStep:
    a, b = flux.alpha, flux.beta
    A = quartic_a(a, b, lam)
    D = cell_cubic_d(b, lam)
    Psi = coupling_psi(a, b, lam)
    absPsi = abs(Psi)
    theta = mod1(np.angle(Psi) / (2 * np.pi))

    R = 1 + (A - 64 * D * (1 - lam)) / (16 * absPsi) if absPsi > 0 else None
    if D != 0:
        if _is_dyadic(a) and _is_dyadic(b):
            phi = float(Psi.real) / (4 * D)
        else:
            phi = absPsi / (4 * D)
    else:
        phi = None

    return DecimationStep(
        flux=flux,
        lam=lam,
        A=A,
        D=D,
        Psi=Psi,
        absPsi=absPsi,
        theta=theta,
        R=R,
        phi=phi,
        alpha_down=mod1(3 * a + b + 3 * theta),
        beta_down=mod1(3 * b + a - 3 * theta),
    )


# At the four flux pairs with both entries in {0, 1/2}, Psi is a real quadratic
# in eta = 1 - lambda and R folds to a real quadratic in lambda; coefficients
# are dyadic rationals, so these evaluate exactly in binary floating point.
_DYADIC_REAL = {
    (False, False): (lambda e: e * e + 0.75 * e + 0.125, lambda l: l * (5 - 4 * l)),
    (True, True): (lambda e: e * e - 0.75 * e + 0.125, lambda l: -(l - 2) * (4 * l - 3)),
    (True, False): (lambda e: e * e - 0.25 * e - 0.125, lambda l: -4 * l * l + 9 * l - 3),
    (False, True): (lambda e: e * e + 0.25 * e - 0.125, lambda l: -4 * l * l + 7 * l - 1),
}


def _dyadic_step(alpha: float, beta: float, lam: float) -> tuple[float, float, float]:
    """Exact orbit step in the real-Psi regime.

    theta is 0 or 1/2 by the sign of the real Psi, and a zero of Psi is a
    removable singularity of the composed map: continue with theta = 0 and
    the signed quadratic (this is what makes e.g. (1/2,1/2,3/4) -> (0,0,0)).
    """
    key = (circ_dist(alpha, 0.5) <= DYADIC_TOL, circ_dist(beta, 0.5) <= DYADIC_TOL)
    psi_fn, r_fn = _DYADIC_REAL[key]
    psi = psi_fn(1 - lam)
    a0, b0 = (0.5 if key[0] else 0.0), (0.5 if key[1] else 0.0)
    if psi < 0:  # theta = 1/2: half-turn twist, R in the |Psi| convention
        return mod1(3 * a0 + b0 + 0.5), mod1(3 * b0 + a0 + 0.5), 2 - r_fn(lam)
    return mod1(3 * a0 + b0), mod1(3 * b0 + a0), r_fn(lam)


def apply_U(alpha: float, beta: float, lam: float) -> tuple[float, float, float]:
    flux = FluxPair(alpha, beta)
    if flux.is_dyadic():
        return _dyadic_step(flux.alpha, flux.beta, lam)
    step = decimation_kit(flux, lam)
    if step.R is None:
        raise OrbitTerminated(f"Psi = 0 at (alpha={alpha}, beta={beta}, lambda={lam})")
    return step.alpha_down, step.beta_down, step.R


def apply_U2(alpha: float, lam: float) -> tuple[float, float]:
    flux = FluxPair(alpha, alpha)
    if flux.is_dyadic():
        return mod1(4 * flux.alpha), _dyadic_step(flux.alpha, flux.alpha, lam)[2]
    step = decimation_kit(flux, lam)
    if step.R is None:
        raise OrbitTerminated(f"Psi = 0 at (alpha={alpha}, lambda={lam})")
    return mod1(4 * alpha), step.R


def zeros_of_D(beta: float) -> list[tuple[float, int]]:
    """Roots of D(beta, .) with multiplicities, ascending.

    Viete's trigonometric solution of the depressed cubic in eta = 1 - lambda:
    eta^3 - (3/16) eta - cos(2 pi beta)/32, all roots real.  The three roots
    sit in [1/2,3/4], [3/4,5/4], [5/4,3/2]; doubles occur only at beta in
    {0, 1/2} and are returned exactly.
    """
    if circ_dist(beta, 0.0) <= DYADIC_TOL:
        return [(0.5, 1), (1.25, 2)]
    if circ_dist(beta, 0.5) <= DYADIC_TOL:
        return [(0.75, 2), (1.5, 1)]
    c = np.cos(2 * np.pi * beta)
    t = np.arccos(np.clip(c, -1.0, 1.0))
    lams = sorted(1 - 0.5 * np.cos((t - 2 * np.pi * k) / 3) for k in range(3))
    return [(float(l), 1) for l in lams]


def psi_real_zeros(flux: FluxPair) -> list[float]:
    """Real lambda where Psi(alpha, beta, .) = 0.

    Case I (both fluxes dyadic): two zeros; Case II (exactly one dyadic): one;
    Case III (3 alpha + beta = 1/2 mod 1): the unique zero 1 + cos(2 pi alpha)/2;
    Case IV: Psi never vanishes on the real line.
    """
    a, b = flux.alpha, flux.beta
    da, db = _is_dyadic(a), _is_dyadic(b)
    if da and db:
        a_half = circ_dist(a, 0.5) <= DYADIC_TOL
        b_half = circ_dist(b, 0.5) <= DYADIC_TOL
        # zeros by pair: (0,0)->{5/4,3/2}, (1/2,1/2)->{1/2,3/4},
        #                (1/2,0)->{1/2,5/4}, (0,1/2)->{3/4,3/2}
        if not a_half and not b_half:
            return [1.25, 1.5]
        if a_half and b_half:
            return [0.5, 0.75]
        if a_half:
            return [0.5, 1.25]
        return [0.75, 1.5]
    if da:
        return [1.5 if circ_dist(a, 0.0) <= DYADIC_TOL else 0.5]
    if db:
        return [1.25 if circ_dist(b, 0.0) <= DYADIC_TOL else 0.75]
    if circ_dist(3 * a + b, 0.5) <= DYADIC_TOL:
        return [float(1 + np.cos(2 * np.pi * a) / 2)]
    return []


def exceptional_set(flux: FluxPair) -> list[float]:
    vals = [r for r, _ in zeros_of_D(flux.beta)] + psi_real_zeros(flux)
    out: list[float] = []
    for v in sorted(vals):
        if not out or v - out[-1] > DEDUP_TOL:
            out.append(v)
    return out


@dataclass(frozen=True)
class ClassificationTag:
    case: str  # Regular | PhiZero | PsiZeroEscape | DZeroVanishing |
    #            DNotSingular | DZeroMixed | DDoubleZero | Indeterminate
    root_mult: int = 0
    exceptional: bool = False
    diagnostics: dict = field(default_factory=dict, compare=False)


def _root_mult_at(beta: float, lam: float, tol: float) -> int:
    for r, m in zeros_of_D(beta):
        if abs(lam - r) <= max(tol, 1e-9):
            return m
    return 0


def _vanishing_limit(flux: FluxPair, lam: float) -> tuple[float | None, dict]:
    """One-sided limits of (1/|Psi(x)|) D(x) (lam-x) / (R(lam)-R(x)).

    Step refinement 1e-4 -> 1e-5 -> 1e-6 on both sides; returns (limit, info)
    with limit None when the refinements never stabilize.
    """
    R_lam = decimation_kit(flux, lam).R
    assert R_lam is not None

    def probe(x: float) -> float:
        k = decimation_kit(flux, x)
        if k.R is None or k.absPsi == 0:
            return np.nan
        denom = R_lam - k.R
        if denom == 0:
            return np.nan
        return (1.0 / k.absPsi) * k.D * (lam - x) / denom

    steps = (1e-4, 1e-5, 1e-6)
    seq = [0.5 * (probe(lam + h) + probe(lam - h)) for h in steps]
    info = {"limit_sequence": seq}
    if any(not np.isfinite(v) for v in seq):
        return None, info
    # decaying toward zero: each refinement shrinks with the step
    mags = [abs(v) for v in seq]
    if mags[1] < 0.5 * mags[0] and mags[2] < 0.5 * mags[1] and mags[2] < 1e-4:
        return 0.0, info
    # stabilized nonzero limit: adjacent refinements agree to relative 1e-5
    # (the finest step can be the noisiest — roundoff in R(lam)-R(x) grows
    # as the step shrinks — so accept the best-agreeing adjacent pair)
    best = min(range(1, len(seq)), key=lambda i: abs(seq[i] - seq[i - 1]))
    if abs(seq[best] - seq[best - 1]) <= 1e-5 * max(abs(seq[best]), 1e-2):
        return float(seq[best]), info
    return None, info


def h_multiple_zero_criterion(flux: FluxPair, lam: float) -> bool:
    """At a D root, whether lambda is a multiple zero of the spectral numerator.

    True iff 8(lam-1)(1 - 2(lam^2 - 2 lam(3-lam) + 45/16)) = cos(2 pi alpha);
    the quadratic in the inner parenthesis is (lam-a)(lam-b) for the other two
    D roots, by Vieta on the cell cubic.
    """
    if abs(cell_cubic_d(flux.beta, lam)) > 1e-10:
        raise ValueError("lambda is not a root of D(beta, .) within 1e-10")
    lhs = 8 * (lam - 1) * (1 - 2 * (lam**2 - 2 * lam * (3 - lam) + 45 / 16))
    return bool(abs(lhs - np.cos(2 * np.pi * flux.alpha)) <= 1e-9)


def classify(flux: FluxPair, lam: float, tol: float = 1e-9) -> ClassificationTag:
    a, b = flux.alpha, flux.beta
    step = decimation_kit(flux, lam)
    d_zero = abs(step.D) <= tol
    psi_zero = step.absPsi <= tol
    diag: dict = {"A": step.A, "D": step.D, "absPsi": step.absPsi}

    if not d_zero and not psi_zero:
        return ClassificationTag("Regular", 0, diagnostics=diag)

    if psi_zero and not d_zero:
        mu = 1 - lam - step.A / (64 * step.D)
        diag["mu"] = mu
        if abs(mu) <= tol:
            return ClassificationTag("PhiZero", 0, diagnostics=diag)
        return ClassificationTag("PsiZeroEscape", 0, diagnostics=diag)

    rm = _root_mult_at(b, lam, tol)
    diag["root_mult"] = rm

    if psi_zero and d_zero:
        alpha_dyadic = _is_dyadic(a)
        if rm == 1:
            if alpha_dyadic:
                return ClassificationTag("DNotSingular", 1, diagnostics=diag)
            # the 3a+b = 1/2 line: Psi and D vanish together at a simple root
            diag["case_iii"] = circ_dist(3 * a + b, 0.5) <= 1e-9
            return ClassificationTag("Indeterminate", 1, diagnostics=diag)
        if alpha_dyadic:
            return ClassificationTag("DZeroVanishing", rm, diagnostics=diag)
        exceptional = (
            circ_dist(b, 0.0) <= tol
            and min(circ_dist(a, 1 / 6), circ_dist(a, 5 / 6)) <= 1e-9
        ) or (
            circ_dist(b, 0.5) <= tol
            and min(circ_dist(a, 1 / 3), circ_dist(a, 2 / 3)) <= 1e-9
        )
        return ClassificationTag("DDoubleZero", rm, exceptional, diagnostics=diag)

    # D root with Psi != 0: always a simple root (a double root of D at
    # beta in {0,1/2} forces Psi(alpha, beta, lam) = 0 for every alpha)
    limit, info = _vanishing_limit(flux, lam)
    diag.update(info)
    diag["dpsi_sq_dlam"] = 2 * (np.conj(step.Psi) * coupling_psi_dlam(a, b, lam)).real
    try:
        diag["h_multiple_zero"] = h_multiple_zero_criterion(flux, lam)
    except ValueError:
        diag["h_multiple_zero"] = None
    if limit is None:
        return ClassificationTag("Indeterminate", rm or 1, diagnostics=diag)
    if limit == 0.0:
        return ClassificationTag("DZeroVanishing", rm or 1, diagnostics=diag)
    return ClassificationTag("DZeroMixed", rm or 1, diagnostics=diag)
