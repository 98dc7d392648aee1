"""Monte Carlo experiments for maximal inequalities of stochastic integrals.

Each experiment simulates the left side of one of the target inequalities
(supremum of many Brownian motions / stochastic convolutions / discrete
martingales) and evaluates the closed-form right side:

  * many-path sup bound:     lhs <= 10 * sup_k sqrt(p + log k) * sigma_k * sqrt(T)
  * long-run OU bound:       lhs <= 18 * sqrt(p + log(1 + a T)) / sqrt(a) * sup|f|
  * martingale sup bound:    lhs <= 13 * ||sup_j (p+log j) d*_j||_p
                                   + 14 * ||sup_j sqrt(p+log j) s_j||_p
  * good-lambda inequality:  P(sup > b*lam, s <= delta*lam)
                                  <= 3 exp(-(b-1)^2/(4 delta^2)) P(sup > lam)
  * Kolmogorov-Chentsov:     ||exponent-beta Holder norm||_p <= closed form
  * Levy modulus statistics on a fine grid.

All smoothness constants are the scalar/Hilbert case (D = 1).  Grid maxima
under-approximate continuum suprema, which only weakens left sides, so the
one-sided contracts remain valid under discretization.

Randomness: replicate r always draws from the counter-based substream
(seed, r) (Philox jumped by r), so results are reproducible bit-for-bit no
matter how replicates are scheduled or chunked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.signal import lfilter
from scipy.special import gammaln

from .errors import DomainError, ParameterError, ShapeError, SizeError

_ARRAY_BUDGET = 1 << 26  # elements in a single simulated block


def substream(seed: int, replicate: int) -> np.random.Generator:
    """Independent counter-based stream for one replicate."""
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)).jumped(replicate))


def gaussian_moment(p: float) -> float:
    """||N(0,1)||_p = (2^(p/2) Gamma((p+1)/2) / sqrt(pi))^(1/p)."""
    if p < 1.0:
        raise DomainError("p must be >= 1")
    logm = 0.5 * p * math.log(2.0) + gammaln((p + 1.0) / 2.0) - 0.5 * math.log(math.pi)
    return math.exp(logm / p)


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo L^p estimate ((1/R) sum |X_r|^p)^(1/p) with delta-method
    standard error."""

    p: float
    n_replicates: int
    lp_value: float
    stderr: float
    seed: int

    @classmethod
    def from_samples(cls, samples, p: float, seed: int) -> "McEstimate":
        x = np.abs(np.asarray(samples, dtype=float))
        if x.ndim != 1 or len(x) == 0:
            raise ShapeError("samples must be a nonempty 1-d array")
        xp = x ** p
        m = float(xp.mean())
        if m == 0.0:
            return cls(p=p, n_replicates=len(x), lp_value=0.0, stderr=0.0, seed=seed)
        se_m = float(xp.std(ddof=1)) / math.sqrt(len(x)) if len(x) > 1 else 0.0
        lp = m ** (1.0 / p)
        se = se_m / p * m ** (1.0 / p - 1.0)
        return cls(p=p, n_replicates=len(x), lp_value=lp, stderr=se, seed=seed)


# -- basic simulation blocks -------------------------------------------------


@dataclass
class WienerEnsemble:
    """Independent N(0, dt) increments, shape (replicates, components, steps)."""

    replicates: int
    components: int
    steps: int
    dt: float
    increments: np.ndarray = field(repr=False)
    seed: int = 0

    def paths(self) -> np.ndarray:
        """Brownian values on the grid including time 0; shape (R, K, steps+1)."""
        out = np.zeros(
            (self.replicates, self.components, self.steps + 1), dtype=float
        )
        np.cumsum(self.increments, axis=2, out=out[:, :, 1:])
        return out


def simulate_brownian(
    replicates: int, components: int, steps: int, dt: float, seed: int
) -> WienerEnsemble:
    if min(replicates, components, steps) < 1:
        raise ParameterError("replicates, components, steps must be >= 1")
    if dt <= 0.0:
        raise ParameterError("dt must be positive")
    if replicates * components * steps > _ARRAY_BUDGET:
        raise SizeError("ensemble exceeds the array budget; simulate in chunks")
    inc = np.empty((replicates, components, steps), dtype=float)
    sdt = math.sqrt(dt)
    for r in range(replicates):
        inc[r] = substream(seed, r).standard_normal((components, steps)) * sdt
    return WienerEnsemble(
        replicates=replicates, components=components, steps=steps, dt=dt,
        increments=inc, seed=seed,
    )


def ito_integral(f_values, increments) -> float:
    """Left-point Riemann sum sum_i f(t_i) dW_i of an adapted step function."""
    f = np.asarray(f_values, dtype=float)
    dw = np.asarray(increments, dtype=float)
    if f.shape != dw.shape:
        raise ShapeError(f"integrand grid {f.shape} != increment grid {dw.shape}")
    return float(np.dot(f.ravel(), dw.ravel()))


@dataclass(frozen=True)
class OUParams:
    """Exponentially-stable scalar Ornstein-Uhlenbeck setup du = -a u dt + f dW."""

    a: float
    T: float
    dt: float
    forcing: float | Callable = 1.0
    D: float = 1.0

    def __post_init__(self):
        if self.a <= 0.0:
            raise ParameterError("decay rate a must be positive")
        if not 0.0 < self.dt <= self.T:
            raise ParameterError("need 0 < dt <= T")

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))

    def forcing_value(self, t: float, u: float) -> float:
        if callable(self.forcing):
            try:
                return float(self.forcing(t, u))
            except TypeError:
                return float(self.forcing(t))
        return float(self.forcing)


def ou_exact_path(params: OUParams, increments) -> np.ndarray:
    """Grid path of the OU process with the exact per-step transition.

    u_{i+1} = e^(-a dt) u_i + f_i * sqrt((1 - e^(-2 a dt)) / (2 a dt)) * dW_i,
    which reproduces the exact grid law for forcing frozen at the left
    endpoint (exponential-Euler for state-dependent forcing).
    """
    dw = np.asarray(increments, dtype=float)
    if dw.ndim != 1 or len(dw) != params.steps:
        raise ShapeError(f"need {params.steps} increments, got {dw.shape}")
    a, dt = params.a, params.dt
    rho = math.exp(-a * dt)
    gain = math.sqrt((1.0 - math.exp(-2.0 * a * dt)) / (2.0 * a * dt))
    u = np.zeros(len(dw) + 1)
    if not callable(params.forcing):
        xi = float(params.forcing) * gain * dw
        u[1:] = lfilter([1.0], [1.0, -rho], xi)
        return u
    for i in range(len(dw)):
        f_i = params.forcing_value(i * dt, u[i])
        u[i + 1] = rho * u[i] + f_i * gain * dw[i]
    return u


# -- experiments -------------------------------------------------------------


@dataclass
class SupIntegralsResult:
    n: int
    p: float
    T: float
    lhs: McEstimate
    rhs: float

    @property
    def passed(self) -> bool:
        return self.lhs.lp_value <= self.rhs + 3.0 * self.lhs.stderr

    def row(self) -> dict:
        return {
            "n": self.n, "p": self.p, "T": self.T,
            "lhs": self.lhs.lp_value, "lhs_stderr": self.lhs.stderr,
            "rhs": self.rhs, "passed": self.passed,
        }


def experiment_sup_integrals(
    n: int,
    sigmas,
    p: float,
    T: float,
    replicates: int,
    seed: int,
    steps_per_unit: int = 256,
) -> SupIntegralsResult:
    """Sup over n weighted Brownian paths vs. the sqrt(p + log k) envelope."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    sig = np.broadcast_to(np.asarray(sigmas, dtype=float), (n,))
    if np.any(sig < 0.0):
        raise ParameterError("weights must be nonnegative")
    steps = max(1, int(round(steps_per_unit * T)))
    dt = T / steps
    sdt = math.sqrt(dt)
    samples = np.empty(replicates)
    for r in range(replicates):
        g = substream(seed, r)
        inc = g.standard_normal((n, steps))
        np.cumsum(inc, axis=1, out=inc)
        np.abs(inc, out=inc)
        samples[r] = float((sig * (sdt * inc.max(axis=1))).max())
    ks = np.arange(1, n + 1, dtype=float)
    rhs = 10.0 * float((np.sqrt(p + np.log(ks)) * sig).max()) * math.sqrt(T)
    return SupIntegralsResult(
        n=n, p=p, T=T, lhs=McEstimate.from_samples(samples, p, seed), rhs=rhs
    )


@dataclass
class OULongTermRow:
    T: float
    estimate: McEstimate
    bound: float

    @property
    def passed(self) -> bool:
        return self.estimate.lp_value <= self.bound + 3.0 * self.estimate.stderr

    def row(self) -> dict:
        return {
            "T": self.T, "estimate": self.estimate.lp_value,
            "stderr": self.estimate.stderr, "bound": self.bound,
            "passed": self.passed,
        }


def experiment_ou_longterm(
    a: float,
    T_list: Sequence[float],
    p: float,
    replicates: int,
    seed: int,
    forcing: float = 1.0,
    dt_rule: Optional[Callable[[float], float]] = None,
) -> list[OULongTermRow]:
    """Running maximum of an exponentially-stable OU process over growing
    horizons vs. the 18 sqrt(p + log(1 + a T)) / sqrt(a) bound."""
    if a <= 0.0:
        raise ParameterError("decay rate a must be positive")
    f_sup = abs(float(forcing))
    rows = []
    for T in T_list:
        dt = min(0.01, T / 1e5) if dt_rule is None else dt_rule(T)
        params = OUParams(a=a, T=T, dt=dt, forcing=forcing)
        steps = params.steps
        rho = math.exp(-a * dt)
        gain = f_sup * math.sqrt((1.0 - math.exp(-2.0 * a * dt)) / (2.0 * a * dt))
        sdt = math.sqrt(dt)
        samples = np.empty(replicates)
        for r in range(replicates):
            xi = substream(seed, r).standard_normal(steps) * (gain * sdt)
            u = lfilter([1.0], [1.0, -rho], xi)
            samples[r] = float(np.abs(u).max())
        bound = 18.0 * math.sqrt(p + math.log(1.0 + a * T)) / math.sqrt(a) * f_sup
        rows.append(OULongTermRow(
            T=T, estimate=McEstimate.from_samples(samples, p, seed), bound=bound
        ))
    return rows


@dataclass
class MartingaleSupResult:
    n: int
    steps: int
    scheme: str
    p: float
    lhs: McEstimate
    term_jump: McEstimate     # ||sup_j (p+log j) d*_j||_p
    term_variance: McEstimate  # ||sup_j sqrt(p+log j) s_j||_p

    @property
    def rhs(self) -> float:
        return 13.0 * self.term_jump.lp_value + 14.0 * self.term_variance.lp_value

    @property
    def passed(self) -> bool:
        se = math.sqrt(
            self.lhs.stderr ** 2
            + (13.0 * self.term_jump.stderr) ** 2
            + (14.0 * self.term_variance.stderr) ** 2
        )
        return self.lhs.lp_value <= self.rhs + 3.0 * se

    def row(self) -> dict:
        return {
            "n": self.n, "steps": self.steps, "scheme": self.scheme, "p": self.p,
            "lhs": self.lhs.lp_value, "lhs_stderr": self.lhs.stderr,
            "rhs": self.rhs, "passed": self.passed,
        }


def experiment_martingale_sup(
    n: int,
    steps: int,
    scheme: str,
    p: float,
    replicates: int,
    seed: int,
    weights=None,
) -> MartingaleSupResult:
    """Sup over n conditionally-symmetric random walks vs. the two-term
    jump/variance bound, all three norms estimated on the same draws."""
    if scheme not in ("rademacher_walks", "gaussian_walks"):
        raise ParameterError(f"unknown scheme {scheme!r}")
    w = np.ones(n) if weights is None else np.broadcast_to(
        np.asarray(weights, dtype=float), (n,)
    )
    if np.any(w < 0.0):
        raise ParameterError("weights must be nonnegative")
    js = np.arange(1, n + 1, dtype=float)
    jump_weight = (p + np.log(js)) * w
    var_weight = np.sqrt(p + np.log(js)) * w * math.sqrt(steps)
    b_const = float(var_weight.max())  # s_j = w_j sqrt(steps) in both schemes

    lhs_s = np.empty(replicates)
    jump_s = np.empty(replicates)
    var_s = np.full(replicates, b_const)
    for r in range(replicates):
        g = substream(seed, r)
        if scheme == "rademacher_walks":
            inc = g.integers(0, 2, size=(n, steps)).astype(float) * 2.0 - 1.0
            dstar = w.copy()
        else:
            inc = g.standard_normal((n, steps))
            dstar = w * np.abs(inc).max(axis=1)
        paths = np.cumsum(inc, axis=1)
        lhs_s[r] = float((w * np.abs(paths).max(axis=1)).max())
        jump_s[r] = float(((p + np.log(js)) * dstar).max())
    return MartingaleSupResult(
        n=n, steps=steps, scheme=scheme, p=p,
        lhs=McEstimate.from_samples(lhs_s, p, seed),
        term_jump=McEstimate.from_samples(jump_s, p, seed),
        term_variance=McEstimate.from_samples(var_s, p, seed),
    )


@dataclass
class GoodLambdaRow:
    lam: float
    p_joint: float
    p_tail: float
    factor: float
    stderr: float

    @property
    def passed(self) -> bool:
        return self.p_joint <= self.factor * self.p_tail + 3.0 * self.stderr

    def row(self) -> dict:
        return {
            "lambda": self.lam, "p_joint": self.p_joint, "p_tail": self.p_tail,
            "factor": self.factor, "bound": self.factor * self.p_tail,
            "stderr": self.stderr, "passed": self.passed,
        }


def experiment_good_lambda(
    beta: float,
    delta: float,
    replicates: int,
    seed: int,
    T: float = 1.0,
    steps: int = 1024,
    lambda_list: Optional[Sequence[float]] = None,
    n_lambda: int = 10,
    quantile_range: tuple[float, float] = (0.30, 0.75),
    stopping: str = "uniform",
) -> list[GoodLambdaRow]:
    """Good-lambda inequality for a randomly stopped unit integrand.

    Default integrand f(t) = 1_{t <= tau} with tau uniform per replicate, so
    the running sup is sup_{t <= tau} |W(t)| and the quadratic variation
    sqrt(m dt) is genuinely random.  ``stopping="none"`` keeps f = 1 on all
    of [0, T], the degenerate case where the small-variation event is all
    or nothing per lambda.  Lambda defaults to empirical quantiles, which
    keeps every tail probability well above 50/R.
    """
    if beta <= 1.0:
        raise ParameterError("beta must exceed 1")
    if delta <= 0.0:
        raise ParameterError("delta must be positive")
    if stopping not in ("uniform", "none"):
        raise ParameterError(f"unknown stopping mode {stopping!r}")
    dt = T / steps
    sdt = math.sqrt(dt)
    psi_star = np.empty(replicates)
    s_psi = np.empty(replicates)
    for r in range(replicates):
        g = substream(seed, r)
        tau = g.uniform(0.0, T) if stopping == "uniform" else T
        m = min(int(tau / dt), steps)
        if m == 0:
            psi_star[r] = 0.0
        else:
            w = np.cumsum(g.standard_normal(steps)[:m]) * sdt
            psi_star[r] = float(np.abs(w).max())
        s_psi[r] = math.sqrt(m * dt)
    if lambda_list is None:
        qs = np.linspace(*quantile_range, n_lambda)
        lambda_list = np.quantile(psi_star, qs)
    factor = 3.0 * math.exp(-((beta - 1.0) ** 2) / (4.0 * delta ** 2))
    rows = []
    for lam in lambda_list:
        joint = (psi_star > beta * lam) & (s_psi <= delta * lam)
        tail = psi_star > lam
        pj, pt = float(joint.mean()), float(tail.mean())
        se = math.sqrt(
            pj * (1.0 - pj) / replicates
            + factor ** 2 * pt * (1.0 - pt) / replicates
        )
        rows.append(GoodLambdaRow(
            lam=float(lam), p_joint=pj, p_tail=pt, factor=factor, stderr=se
        ))
    return rows


@dataclass
class LevyModulusResult:
    n_steps: int
    replicates: int
    h_rows: list[dict]
    p_rows: list[dict]
    fitted_c: float

    @property
    def c_variation(self) -> float:
        cs = [row["c_fixed"] for row in self.p_rows]
        return max(cs) / min(cs)

    @property
    def c_adapted_variation(self) -> float:
        cs = [row["c_adapted"] for row in self.p_rows]
        return max(cs) / min(cs)


def _gap_ladder(n_steps: int, dense_upto: int = 32, count: int = 96) -> np.ndarray:
    dense = np.arange(1, min(dense_upto, n_steps - 1) + 1)
    geo = np.unique(np.round(np.geomspace(1, n_steps - 1, count)).astype(int))
    return np.unique(np.concatenate([dense, geo]))


def experiment_levy_modulus(
    n_steps: int,
    h_list: Sequence[float],
    replicates: int,
    seed: int,
    p_list: Sequence[float] = (1.0, 2.0, 4.0, 8.0),
) -> LevyModulusResult:
    """Small-window modulus statistic and the log-weighted global sup.

    For each h, statistic = sup over grid pairs closer than h of
    |W(s) - W(r)| / sqrt(2 h |log h|), averaged over replicates.  The global
    sup uses the fixed weight sqrt(g (1 - log(g)/2)) on a dyadic-dense gap
    ladder; its L^p estimates divided by sqrt(p) give the implied constants
    c_fixed, and the p-adapted weight sqrt(g (p - log g)) gives c_adapted.
    """
    for h in h_list:
        m = h * n_steps
        if abs(m - round(m)) > 1e-9 or round(m) < 2:
            raise ParameterError(f"window {h} is not a multiple of 1/{n_steps}")
    dt = 1.0 / n_steps
    sdt = math.sqrt(dt)
    gaps = _gap_ladder(n_steps)
    raw = np.empty((replicates, len(gaps)))
    for r in range(replicates):
        inc = substream(seed, r).standard_normal(n_steps)
        w = np.empty(n_steps + 1)
        w[0] = 0.0
        np.cumsum(inc, out=w[1:])
        w *= sdt
        for gi, gap in enumerate(gaps):
            raw[r, gi] = float(np.abs(w[gap:] - w[:-gap]).max())

    h_rows = []
    for h in h_list:
        m = int(round(h * n_steps))
        use = gaps <= m - 1
        stats = raw[:, use].max(axis=1) / math.sqrt(2.0 * h * abs(math.log(h)))
        h_rows.append({
            "h": h, "statistic": float(stats.mean()),
            "stderr": float(stats.std(ddof=1) / math.sqrt(replicates)),
        })

    gs = gaps * dt
    fixed_w = np.sqrt(gs * (1.0 - 0.5 * np.log(gs)))
    sup_fixed = (raw / fixed_w).max(axis=1)
    p_rows = []
    for p in p_list:
        est = McEstimate.from_samples(sup_fixed, p, seed)
        adapted_w = np.sqrt(gs * (p - np.log(gs)))
        sup_adapted = (raw / adapted_w).max(axis=1)
        est_ad = McEstimate.from_samples(sup_adapted, p, seed)
        p_rows.append({
            "p": p, "weighted_sup": est.lp_value, "stderr": est.stderr,
            "c_fixed": est.lp_value / math.sqrt(p),
            "c_adapted": est_ad.lp_value,
        })
    sqrt_p = np.sqrt([row["p"] for row in p_rows])
    ests = np.array([row["weighted_sup"] for row in p_rows])
    fitted_c = float((sqrt_p * ests).sum() / (sqrt_p ** 2).sum())
    return LevyModulusResult(
        n_steps=n_steps, replicates=replicates,
        h_rows=h_rows, p_rows=p_rows, fitted_c=fitted_c,
    )


@dataclass
class KCBoundResult:
    alpha: float
    beta: float
    p: float
    grid_points: int
    lhs: McEstimate
    rhs: float

    @property
    def passed(self) -> bool:
        return self.lhs.lp_value <= self.rhs + 3.0 * self.lhs.stderr

    def row(self) -> dict:
        return {
            "alpha": self.alpha, "beta": self.beta, "p": self.p,
            "grid_points": self.grid_points, "lhs": self.lhs.lp_value,
            "lhs_stderr": self.lhs.stderr, "rhs": self.rhs, "passed": self.passed,
        }


def kc_rhs_constant(alpha: float, beta: float, p: float, d: float,
                    c: float, n2: int) -> float:
    """Closed-form right side of the continuity bound for a unit-diameter
    space, per unit alpha-Holder norm of the process."""
    c_m = 2.0 * (c * 3.0 ** (2.0 * d + 1.0) / d * float(n2) ** 4) ** (1.0 / d)
    ratio = ((alpha - beta) / (alpha - d / p - beta)) ** (1.0 / p)
    return 24.0 * c_m ** alpha / beta * ratio


def experiment_kc_bound(
    alpha: float,
    beta: float,
    p: float,
    grid_points: int,
    replicates: int,
    seed: int,
    dims: Optional[tuple[float, float, int]] = None,
) -> KCBoundResult:
    """Holder seminorm of Brownian motion at exponent beta vs. the
    Kolmogorov-Chentsov moment bound derived from the net embedding."""
    d = 1.0
    if p <= d:
        raise ParameterError(f"need p > d = {d}")
    if not d / p < alpha < 1.0:
        raise ParameterError(f"alpha must lie in ({d / p:g}, 1)")
    if not 0.0 < beta < alpha - d / p:
        raise ParameterError(f"beta must lie in (0, {alpha - d / p:g})")
    if grid_points < 3:
        raise ParameterError("grid needs at least 3 points")
    c, n2 = (4.0, 81) if dims is None else (dims[1], dims[2])
    n_gaps = grid_points - 1
    h = 1.0 / n_gaps
    sdt = math.sqrt(h)
    raw = np.empty((replicates, n_gaps))
    for r in range(replicates):
        w = np.empty(grid_points)
        w[0] = 0.0
        np.cumsum(substream(seed, r).standard_normal(n_gaps), out=w[1:])
        w *= sdt
        for gap in range(1, n_gaps + 1):
            raw[r, gap - 1] = float(np.abs(w[gap:] - w[:-gap]).max())
    gap_dist = (np.arange(1, n_gaps + 1) * h) ** beta
    samples = (raw / gap_dist).max(axis=1)
    lhs = McEstimate.from_samples(samples, p, seed)
    mu_p = gaussian_moment(p)
    # exact alpha-Holder norm of Brownian increments in L^p on this grid
    exps = 0.5 - alpha
    dists = np.arange(1, n_gaps + 1) * h
    z_alpha = mu_p * float((dists ** exps).max())
    rhs = kc_rhs_constant(alpha, beta, p, d, c, n2) * z_alpha
    return KCBoundResult(
        alpha=alpha, beta=beta, p=p, grid_points=grid_points, lhs=lhs, rhs=rhs
    )


def weighted_sup_lemma_bound(p: float, alpha: float, beta: float) -> float:
    """((alpha - beta) / (alpha - 1/p - beta))^(1/p), the constant turning a
    polynomially-weighted sequence sup into a sup of L^p norms."""
    if p < 1.0:
        raise ParameterError("p must be >= 1")
    if alpha <= 1.0 / p:
        raise ParameterError("need alpha > 1/p")
    if not 0.0 <= beta < alpha - 1.0 / p:
        raise ParameterError(f"beta must lie in [0, {alpha - 1.0 / p:g})")
    return ((alpha - beta) / (alpha - 1.0 / p - beta)) ** (1.0 / p)


def fit_log_slope(xs, ys) -> float:
    """Least-squares slope of log(ys) against log(xs)."""
    lx, ly = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    return float(np.polyfit(lx, ly, 1)[0])


def r_squared(xs, ys) -> float:
    """R^2 of the linear fit of ys against xs."""
    x, y = np.asarray(xs, float), np.asarray(ys, float)
    coef = np.polyfit(x, y, 1)
    resid = y - np.polyval(coef, x)
    ss_res = float((resid ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    return 1.0 - ss_res / ss_tot
