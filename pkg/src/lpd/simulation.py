"""Synthetic benchmark harness: model builders, samplers, rates, and
replicated method comparisons.

Three covariance designs are supported, all with mu1 = 0 and mu2 carrying
s0 leading ones:

  1. compound symmetry: unit diagonal, constant off-diagonal rho;
  2. a random precision matrix (B + d I) / (1 + d) whose first s0 rows mix
     0.5 * Bernoulli(0.2) entries and whose remaining block is constant 0.5,
     shifted by d = max(-lambda_min(B), 0) + 0.05 and rescaled to unit
     diagonal;
  3. AR(1) covariance rho^|i-j|, whose inverse is tridiagonal.

Replications draw independent train/test sets from deterministic per-rep
RNG streams, tune lambda by cross-validation on the train set, and report
mean/SD test errors plus support-recovery metrics.
"""

from __future__ import annotations

import concurrent.futures
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from . import linalg
from .classifier import (
    LpdModel,
    auto_ridge,
    fit_glda,
    fit_lpd_from_moments,
    fit_naive_bayes,
    fit_ofair,
    oracle_fisher,
    predict,
)
from .errors import DimensionMismatch, LpdError, SolverError, ZeroBeta
from .l1solver import ZERO_FLOOR, SolverConfig
from .model_selection import CvPlan, cross_validate, default_lambda_grid
from .stats import LabeledDataset, compute_moments

METHOD_ORDER = ("lpd", "naive_bayes", "glda", "ofair", "oracle")
_MODEL_DEFAULT_RHO = {1: 0.5, 3: 0.8}


@dataclass
class SimulationSpec:
    """Generator parameters for one benchmark configuration."""

    model_id: int
    p: int
    n1: int = 200
    n2: int = 200
    s0: int = 10
    rho: float | None = None
    distribution: str = "normal"
    reps: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.model_id not in (1, 2, 3):
            raise ValueError("model_id must be 1, 2, or 3")
        if self.p < 1 or self.s0 < 1 or self.s0 > self.p:
            raise ValueError("need 1 <= s0 <= p")
        if self.n1 < 2 or self.n2 < 2:
            raise ValueError("each class needs at least 2 samples")
        if self.rho is not None and not -1 < self.rho < 1:
            raise ValueError("rho must lie in (-1, 1)")
        if self.distribution not in ("normal", "t5"):
            raise ValueError("distribution must be 'normal' or 't5'")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")

    def resolved_rho(self) -> float:
        if self.rho is not None:
            return float(self.rho)
        return _MODEL_DEFAULT_RHO.get(self.model_id, 0.0)


@dataclass
class GroundTruth:
    """Population parameters of one generated model."""

    mu1: np.ndarray
    mu2: np.ndarray
    sigma: np.ndarray
    omega: np.ndarray
    beta_star: np.ndarray
    delta_p: float

    def __post_init__(self):
        if self.delta_p <= 0:
            raise ValueError("delta_p must be positive")


@dataclass
class SupportMetrics:
    """Declared/true nonzero bookkeeping; rates are NaN when undefined."""

    pos: int
    tpos: int
    tpr: float
    fpr: float


def _mean_vectors(p, s0):
    mu1 = np.zeros(p)
    mu2 = np.zeros(p)
    mu2[:s0] = 1.0
    return mu1, mu2


def _compound_symmetry(p, rho):
    sigma = np.full((p, p), rho)
    np.fill_diagonal(sigma, 1.0)
    omega = np.full((p, p), -rho / (1.0 + (p - 1) * rho))
    np.fill_diagonal(omega, 1.0 - rho / (1.0 + (p - 1) * rho))
    return sigma, omega / (1.0 - rho)


def _ar1(p, rho):
    idx = np.arange(p)
    sigma = rho ** np.abs(np.subtract.outer(idx, idx))
    if p == 1:
        return sigma, np.ones((1, 1))
    denom = 1.0 - rho * rho
    omega = np.zeros((p, p))
    np.fill_diagonal(omega, (1.0 + rho * rho) / denom)
    omega[0, 0] = omega[p - 1, p - 1] = 1.0 / denom
    off = -rho / denom
    omega[idx[:-1], idx[1:]] = off
    omega[idx[1:], idx[:-1]] = off
    return sigma, omega


def _random_precision(p, s0, rng):
    """Symmetric B with Bernoulli-sparse leading rows, shifted to be PD."""
    b = np.eye(p)
    for i in range(min(s0, p)):
        draws = 0.5 * (rng.random(p - i - 1) < 0.2)
        b[i, i + 1 :] = draws
        b[i + 1 :, i] = draws
    for i in range(s0, p):
        b[i, i + 1 :] = 0.5
        b[i + 1 :, i] = 0.5
    eigenvalues, _ = linalg.sym_eigen(b)
    shift = max(-float(eigenvalues[-1]), 0.0) + 0.05
    omega = (b + shift * np.eye(p)) / (1.0 + shift)
    # rescale to exact unit diagonal; a numerical no-op when diag(B) = 1
    scale = 1.0 / np.sqrt(np.diag(omega))
    omega = scale[:, None] * omega * scale[None, :]
    sigma = linalg.spd_inverse(omega)
    return sigma, omega


def build_model(spec: SimulationSpec, rng=None) -> GroundTruth:
    """Construct the population parameters for the spec's model.

    Model 2 draws its Bernoulli pattern from ``rng`` (seeded from
    ``spec.seed`` when omitted), so it is redrawn per replication stream;
    models 1 and 3 are deterministic closed forms.
    """
    p, s0 = spec.p, spec.s0
    if spec.model_id == 1:
        sigma, omega = _compound_symmetry(p, spec.resolved_rho())
    elif spec.model_id == 3:
        sigma, omega = _ar1(p, spec.resolved_rho())
    else:
        if rng is None:
            rng = np.random.default_rng(spec.seed)
        sigma, omega = _random_precision(p, s0, rng)
    mu1, mu2 = _mean_vectors(p, s0)
    delta = mu1 - mu2
    beta_star = omega @ delta
    return GroundTruth(
        mu1=mu1,
        mu2=mu2,
        sigma=sigma,
        omega=omega,
        beta_star=beta_star,
        delta_p=float(delta @ beta_star),
    )


def sample(truth: GroundTruth, spec: SimulationSpec, rng) -> LabeledDataset:
    """Draw n1 class-1 and n2 class-2 rows from the model.

    Normal draws use X = mu + L z with L L' = Sigma. The heavy-tailed
    variant multiplies each Gaussian row by sqrt(5 / W), W ~ chi2(5), so
    Sigma is the scale matrix and the marginal covariance is (5/3) Sigma.
    """
    chol = np.linalg.cholesky(truth.sigma)
    blocks = []
    for mu, count in ((truth.mu1, spec.n1), (truth.mu2, spec.n2)):
        core = rng.standard_normal((count, truth.mu1.size)) @ chol.T
        if spec.distribution == "t5":
            w = rng.chisquare(5, count)
            core *= np.sqrt(5.0 / w)[:, None]
        blocks.append(mu + core)
    labels = np.concatenate([np.ones(spec.n1, dtype=int), np.full(spec.n2, 2)])
    return LabeledDataset(np.vstack(blocks), labels)


def oracle_rate(truth: GroundTruth) -> float:
    """Misclassification rate of the rule at the true parameters:
    Phi(-sqrt(delta_p) / 2)."""
    return float(ndtr(-0.5 * math.sqrt(truth.delta_p)))


def conditional_rate(truth: GroundTruth, model: LpdModel) -> float:
    """Error rate of a fitted direction under the true Gaussian populations.

    R = 1 - (1/2) Phi(-(mu_hat - mu1)' beta / s) - (1/2) Phi((mu_hat - mu2)' beta / s)
    with s = sqrt(beta' Sigma beta). Equals the oracle rate when beta is
    proportional to Omega delta and mu_hat = mu.
    """
    beta, mu_hat = model.beta, model.mu_hat
    if beta.size != truth.mu1.size:
        raise DimensionMismatch("model dimension does not match the ground truth")
    quad = float(beta @ truth.sigma @ beta)
    if quad <= 0.0 or not np.any(beta):
        raise ZeroBeta("conditional rate undefined for beta = 0")
    scale = math.sqrt(quad)
    term1 = ndtr(-float((mu_hat - truth.mu1) @ beta) / scale)
    term2 = ndtr(float((mu_hat - truth.mu2) @ beta) / scale)
    return float(1.0 - 0.5 * term1 - 0.5 * term2)


def support_metrics(beta_hat, beta_star, support_eps=1e-3) -> SupportMetrics:
    """POS / TPOS / TPR / FPR of the declared support.

    The estimate's support is thresholded at support_eps * max|beta_hat|
    (interior-point output is never exactly zero); the reference support is
    exact nonzeros (|.| > 1e-10). Rates with an empty denominator are NaN.
    """
    beta_hat = linalg.as_vector(beta_hat, "beta_hat")
    beta_star = linalg.as_vector(beta_star, "beta_star")
    if beta_hat.size != beta_star.size:
        raise DimensionMismatch("beta_hat and beta_star must have equal length")
    top = np.abs(beta_hat).max()
    if top <= ZERO_FLOOR:
        declared = np.zeros(beta_hat.size, bool)
    else:
        declared = np.abs(beta_hat) > support_eps * top
    true = np.abs(beta_star) > 1e-10
    pos = int(declared.sum())
    tpos = int((declared & true).sum())
    n_true = int(true.sum())
    n_false = int((~true).sum())
    tpr = tpos / n_true if n_true else float("nan")
    fpr = int((declared & ~true).sum()) / n_false if n_false else float("nan")
    return SupportMetrics(pos=pos, tpos=tpos, tpr=tpr, fpr=fpr)


@dataclass
class RepRecord:
    """Everything measured in one completed replication."""

    rep: int
    errors: dict
    oracle_rate: float
    lambda_hat: float = float("nan")
    lambda_opt: float = float("nan")
    support: SupportMetrics | None = None
    conditional_rate: float = float("nan")


@dataclass
class EvalReport:
    """Aggregated replication results; error figures are percentages."""

    spec: SimulationSpec
    methods: tuple
    reps_completed: int
    reps_failed: int
    failures: list
    error_mean: dict
    error_sd: dict
    lambda_hat_mean: float
    lambda_hat_sd: float
    lambda_opt_mean: float
    lambda_opt_sd: float
    pos_mean: float
    pos_sd: float
    tpos_mean: float
    tpos_sd: float
    tpr_mean: float
    tpr_sd: float
    fpr_mean: float
    fpr_sd: float
    conditional_rates: list
    oracle_rate_mean: float
    oracle_rate_sd: float
    records: list = field(default_factory=list)

    def to_rows(self):
        """Fixed-order (section, name, mean, sd) rows for CSV reports."""
        rows = []
        for method in METHOD_ORDER:
            if method in self.methods:
                rows.append(("error", method, self.error_mean[method], self.error_sd[method]))
        if "lpd" in self.methods:
            rows.append(("support", "pos", self.pos_mean, self.pos_sd))
            rows.append(("support", "tpos", self.tpos_mean, self.tpos_sd))
            rows.append(("support", "tpr", self.tpr_mean, self.tpr_sd))
            rows.append(("support", "fpr", self.fpr_mean, self.fpr_sd))
            rows.append(("lambda", "hat", self.lambda_hat_mean, self.lambda_hat_sd))
            rows.append(("lambda", "opt", self.lambda_opt_mean, self.lambda_opt_sd))
            rn = np.asarray(self.conditional_rates, dtype=float)
            rows.append(("rate", "conditional", _mean(rn), _sd(rn)))
        rows.append(("rate", "oracle", self.oracle_rate_mean, self.oracle_rate_sd))
        rows.append(("meta", "reps_completed", float(self.reps_completed), float("nan")))
        rows.append(("meta", "reps_failed", float(self.reps_failed), float("nan")))
        return rows


def _mean(values):
    values = values[~np.isnan(values)]
    return float(values.mean()) if values.size else float("nan")


def _sd(values):
    values = values[~np.isnan(values)]
    return float(values.std(ddof=1)) if values.size > 1 else float("nan")


def _error_percent(model, dataset) -> float:
    return 100.0 * float(np.mean(predict(model, dataset.features) != dataset.labels))


def _true_support(truth) -> np.ndarray:
    return np.flatnonzero(truth.mu1 - truth.mu2 != 0.0)


def _run_replication(spec, methods, seed_seq, rep, cv_folds, grid_size, fixed_grid, config):
    rng = np.random.default_rng(seed_seq)
    truth = build_model(spec, rng)
    train = sample(truth, spec, rng)
    test = sample(truth, spec, rng)
    fold_seed = int(rng.integers(0, 2**31 - 1))

    record = RepRecord(rep=rep, errors={}, oracle_rate=oracle_rate(truth))

    if "lpd" in methods:
        moments = compute_moments(train)
        grid = fixed_grid if fixed_grid is not None else default_lambda_grid(moments, grid_size)
        plan = CvPlan(folds=cv_folds, lambda_grid=grid, seed=fold_seed)
        cv = cross_validate(train, plan, config)
        rho = auto_ridge(moments.p, moments.n1 + moments.n2)
        test_errors = {}
        chosen_model = None
        for lam in plan.lambda_grid:
            model = fit_lpd_from_moments(moments, float(lam), config, rho)
            test_errors[float(lam)] = _error_percent(model, test)
            if float(lam) == cv.chosen_lambda:
                chosen_model = model
        best_err = min(test_errors.values())
        record.lambda_opt = min(l for l, e in test_errors.items() if e == best_err)
        record.lambda_hat = cv.chosen_lambda
        record.errors["lpd"] = test_errors[cv.chosen_lambda]
        record.support = support_metrics(
            chosen_model.beta, truth.beta_star, (config or SolverConfig()).support_eps
        )
        record.conditional_rate = conditional_rate(truth, chosen_model)

    if "naive_bayes" in methods:
        record.errors["naive_bayes"] = _error_percent(fit_naive_bayes(train), test)
    if "glda" in methods:
        record.errors["glda"] = _error_percent(fit_glda(train), test)
    if "ofair" in methods:
        record.errors["ofair"] = _error_percent(fit_ofair(train, _true_support(truth)), test)
    if "oracle" in methods:
        record.errors["oracle"] = _error_percent(
            oracle_fisher(truth.mu1, truth.mu2, truth.omega), test
        )
    return record


def run_benchmark(
    spec: SimulationSpec,
    methods=METHOD_ORDER,
    cv_plan: CvPlan | None = None,
    cv_folds: int = 5,
    grid_size: int = 20,
    config: SolverConfig | None = None,
    max_workers: int = 1,
) -> EvalReport:
    """Replicated train/test comparison of the requested methods.

    Per replication: draw independent train and test sets of identical
    sizes, tune lambda by CV on the train set, fit every requested method,
    and score on the test set. ``lambda_opt`` records the grid value
    minimizing the test error. When ``cv_plan`` is given, its folds and
    grid are used verbatim for every replication; otherwise the grid is
    re-anchored at each replication's train moments.

    Replications run on independent deterministic RNG streams, so results
    do not depend on ``max_workers``. Failed replications are excluded
    from the averages and counted, never silently dropped.
    """
    methods = tuple(m.lower() for m in methods)
    unknown = sorted(set(methods) - set(METHOD_ORDER))
    if unknown:
        raise ValueError(f"unknown methods: {unknown}; choose from {METHOD_ORDER}")
    fixed_grid = None
    if cv_plan is not None:
        cv_folds = cv_plan.folds
        fixed_grid = cv_plan.lambda_grid

    streams = np.random.SeedSequence(spec.seed).spawn(spec.reps)
    results: list = [None] * spec.reps
    failures: list = []

    def run_one(rep):
        return _run_replication(
            spec, methods, streams[rep], rep, cv_folds, grid_size, fixed_grid, config
        )

    if max_workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as pool:
            futures = {pool.submit(run_one, rep): rep for rep in range(spec.reps)}
            for fut in concurrent.futures.as_completed(futures):
                rep = futures[fut]
                try:
                    results[rep] = fut.result()
                except (SolverError, LpdError) as exc:
                    failures.append(f"rep {rep}: {exc}")
    else:
        for rep in range(spec.reps):
            try:
                results[rep] = run_one(rep)
            except (SolverError, LpdError) as exc:
                failures.append(f"rep {rep}: {exc}")

    records = [r for r in results if r is not None]
    if not records:
        raise SolverFailure(f"all {spec.reps} replications failed: {failures[:3]}")

    def collect(getter):
        return np.asarray([getter(r) for r in records], dtype=float)

    error_mean, error_sd = {}, {}
    for method in methods:
        vals = collect(lambda r, m=method: r.errors.get(m, float("nan")))
        error_mean[method] = _mean(vals)
        error_sd[method] = _sd(vals)

    sup = [r.support for r in records if r.support is not None]
    pos = np.asarray([s.pos for s in sup], dtype=float) if sup else np.array([])
    tpos = np.asarray([s.tpos for s in sup], dtype=float) if sup else np.array([])
    tpr = np.asarray([s.tpr for s in sup], dtype=float) if sup else np.array([])
    fpr = np.asarray([s.fpr for s in sup], dtype=float) if sup else np.array([])
    lam_hat = collect(lambda r: r.lambda_hat)
    lam_opt = collect(lambda r: r.lambda_opt)
    rates = collect(lambda r: r.oracle_rate)

    return EvalReport(
        spec=spec,
        methods=methods,
        reps_completed=len(records),
        reps_failed=spec.reps - len(records),
        failures=failures,
        error_mean=error_mean,
        error_sd=error_sd,
        lambda_hat_mean=_mean(lam_hat),
        lambda_hat_sd=_sd(lam_hat),
        lambda_opt_mean=_mean(lam_opt),
        lambda_opt_sd=_sd(lam_opt),
        pos_mean=_mean(pos),
        pos_sd=_sd(pos),
        tpos_mean=_mean(tpos),
        tpos_sd=_sd(tpos),
        tpr_mean=_mean(tpr),
        tpr_sd=_sd(tpr),
        fpr_mean=_mean(fpr),
        fpr_sd=_sd(fpr),
        conditional_rates=[r.conditional_rate for r in records],
        oracle_rate_mean=_mean(rates),
        oracle_rate_sd=_sd(rates),
        records=records,
    )
