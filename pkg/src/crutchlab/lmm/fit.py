"""Random-intercept linear mixed model via the profiled likelihood.

With one variance ratio theta = sigma0^2/sigma^2 the covariance is block
diagonal, V_i = sigma^2 (I + theta J) per participant, so (I + theta J)^-1 =
I - theta/(1 + theta n_i) J collapses every GLS product to per-group sums.
Given theta, beta comes from generalized least squares and sigma^2 in closed
form; a one-dimensional bracketed golden-section/parabolic search over
log theta does the rest, with the theta = 0 boundary (plain OLS) checked
explicitly.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import chi2, norm

from .design import design_matrix

_LOG_THETA_RANGE = (-16.0, 16.0)


class FitError(RuntimeError):
    pass


@dataclass
class FitResult:
    spec: object
    labels: list
    beta: np.ndarray
    se: np.ndarray
    cov_beta: np.ndarray
    theta: float
    sigma0_sq: float          # participant (random intercept) variance
    sigma_sq: float           # residual variance
    loglik: float
    aic: float
    bic: float
    n_obs: int
    n_groups: int
    n_fixed: int
    method: str
    profile: object = field(default=None, repr=False)

    @property
    def p(self):
        """Parameter count: fixed coefficients plus the two variances."""
        return self.n_fixed + 2

    def z_values(self):
        return self.beta / self.se

    def p_values(self):
        return 2.0 * norm.sf(np.abs(self.z_values()))

    def coefficient(self, label):
        return self.beta[self.labels.index(label)]

    def profile_loglik(self, theta):
        """Profiled log-likelihood at an arbitrary variance ratio."""
        return self.profile.loglik(theta)

    def to_json_dict(self):
        return {
            "response": self.spec.response,
            "terms": list(self.spec.terms),
            "method": self.method,
            "labels": self.labels,
            "beta": self.beta.tolist(),
            "se": self.se.tolist(),
            "p_values": self.p_values().tolist(),
            "sigma0_sq": self.sigma0_sq,
            "sigma_sq": self.sigma_sq,
            "loglik": self.loglik,
            "aic": self.aic,
            "bic": self.bic,
            "n_obs": self.n_obs,
            "n_groups": self.n_groups,
        }


class _Profile:
    """Sufficient statistics for O(g p^2) likelihood evaluations in theta.

    Rows are put into a canonical order first so every accumulated product is
    bit-identical under input permutations, which keeps all reported numbers
    permutation invariant.
    """

    def __init__(self, X, y, groups, method):
        codes = np.unique(groups, return_inverse=True)[1]
        order = np.lexsort(tuple(X.T) + (y, codes))
        X, y, codes = X[order], y[order], codes[order]
        self.X, self.y = X, y
        self.method = method
        self.n, self.pfix = X.shape
        self.n_groups = int(codes.max()) + 1
        self.sizes = np.bincount(codes).astype(float)
        self.sx = np.zeros((self.n_groups, self.pfix))  # per-group column sums
        np.add.at(self.sx, codes, X)
        self.sy = np.bincount(codes, weights=y)
        self.codes = codes
        self.xtx = X.T @ X
        self.xty = X.T @ y
        self.yty = float(y @ y)

    def gls(self, theta):
        w = theta / (1.0 + theta * self.sizes)
        xtwx = self.xtx - (self.sx * w[:, None]).T @ self.sx
        xtwy = self.xty - self.sx.T @ (w * self.sy)
        ywy = self.yty - float(w @ (self.sy * self.sy))
        beta = np.linalg.solve(xtwx, xtwy)
        rss = ywy - 2.0 * beta @ xtwy + beta @ xtwx @ beta
        return beta, xtwx, max(rss, 0.0)

    def _dof(self):
        return self.n if self.method == "ML" else self.n - self.pfix

    def loglik(self, theta):
        beta, xtwx, rss = self.gls(theta)
        logdet_vstar = float(np.log1p(theta * self.sizes).sum())
        dof = self._dof()
        if rss <= 0.0:
            raise FitError("non-finite likelihood: zero residual variance")
        sigma_sq = rss / dof
        ll = -0.5 * (dof * math.log(2.0 * math.pi * sigma_sq)
                     + logdet_vstar + dof)
        if self.method == "REML":
            sign, logdet_x = np.linalg.slogdet(xtwx)
            if sign <= 0:
                raise FitError("non-finite likelihood: singular GLS system")
            ll -= 0.5 * logdet_x
        if not np.isfinite(ll):
            raise FitError("non-finite likelihood")
        return ll

    def dloglik_dtheta(self, theta):
        """Analytic derivative of the profiled log-likelihood.

        The envelope theorem removes the d(beta)/d(theta) terms, leaving
        group-sum expressions; used to polish the optimum to full precision.
        """
        beta, xtwx, rss = self.gls(theta)
        resid_sums = self.sy - self.sx @ beta  # group sums of raw residuals
        shrink = (1.0 + theta * self.sizes) ** 2
        drss = -float((resid_sums * resid_sums / shrink).sum())
        dlogdet_vstar = float((self.sizes / (1.0 + theta * self.sizes)).sum())
        dof = self._dof()
        grad = -0.5 * (dof * drss / rss + dlogdet_vstar)
        if self.method == "REML":
            dxtwx = -(self.sx / shrink[:, None]).T @ self.sx
            grad -= 0.5 * float(np.trace(np.linalg.solve(xtwx, dxtwx)))
        return grad


def _maximize_profile(prof):
    """Bracketed scalar maximization over log theta, then a root polish.

    Golden-section/parabolic search locates the optimum; the analytic
    stationarity condition d(loglik)/d(theta) = 0 is then solved by brentq in
    a small bracket so variance components are machine precise. The theta = 0
    boundary (plain least squares) is always checked.
    """
    from scipy.optimize import brentq

    lo, hi = _LOG_THETA_RANGE
    coarse = minimize_scalar(lambda phi: -prof.loglik(math.exp(phi)),
                             bounds=(lo, hi), method="bounded",
                             options={"xatol": 1e-8})
    theta = math.exp(coarse.x)
    ll = -coarse.fun
    for half_width in (0.5, 2.0, 6.0):
        a = max(lo, coarse.x - half_width)
        b = min(hi, coarse.x + half_width)
        ga = prof.dloglik_dtheta(math.exp(a)) * math.exp(a)
        gb = prof.dloglik_dtheta(math.exp(b)) * math.exp(b)
        if ga > 0.0 > gb:
            phi = brentq(lambda u: prof.dloglik_dtheta(math.exp(u)) * math.exp(u),
                         a, b, xtol=1e-13, rtol=8.9e-16)
            cand = math.exp(phi)
            cand_ll = prof.loglik(cand)
            if cand_ll >= ll - 1e-9:   # stationary point refines the coarse max
                theta, ll = cand, cand_ll
            break
    ll_zero = prof.loglik(0.0)
    if ll_zero >= ll:
        theta, ll = 0.0, ll_zero
    return theta, ll


def fit_random_intercept(spec, data):
    """Fit the model; ML by default, REML when the spec says so."""
    X, labels, y, groups = design_matrix(spec, data)
    n, pfix = X.shape
    if len(set(groups)) < 2:
        raise FitError("needs >= 2 groups for a random intercept")
    if np.linalg.matrix_rank(X) < pfix:
        raise FitError("design matrix is rank deficient")

    prof = _Profile(X, y, groups, spec.method)
    theta, ll = _maximize_profile(prof)

    beta, xtwx, rss = prof.gls(theta)
    dof = n if spec.method == "ML" else n - pfix
    sigma_sq = rss / dof
    cov_beta = sigma_sq * np.linalg.inv(xtwx)
    se = np.sqrt(np.diag(cov_beta))
    p_total = pfix + 2
    aic = -2.0 * ll + 2.0 * p_total
    bic = -2.0 * ll + p_total * math.log(n)
    return FitResult(
        spec=spec, labels=labels, beta=beta, se=se, cov_beta=cov_beta,
        theta=theta, sigma0_sq=theta * sigma_sq, sigma_sq=sigma_sq,
        loglik=ll, aic=aic, bic=bic, n_obs=n, n_groups=prof.n_groups,
        n_fixed=pfix, method=spec.method, profile=prof,
    )


def information_criteria(fit):
    """(AIC, BIC) from the stored log-likelihood and parameter count."""
    return aic_bic(fit.loglik, fit.p, fit.n_obs)


def aic_bic(loglik, n_params, n_obs):
    aic = -2.0 * loglik + 2.0 * n_params
    bic = -2.0 * loglik + n_params * math.log(n_obs)
    return aic, bic


@dataclass
class LRTResult:
    chi2: float
    df: int
    p_value: float


def likelihood_ratio_test(fit_small, fit_large):
    """Chi-square LRT between nested fits; valid on ML fits only when the
    fixed effects differ."""
    if fit_small.method != fit_large.method:
        raise ValueError("cannot compare fits with different estimation methods")
    same_fixed = fit_small.labels == fit_large.labels
    if fit_small.method == "REML" and not same_fixed:
        raise ValueError("REML likelihoods are not comparable across fixed effects")
    if not set(fit_small.labels) <= set(fit_large.labels):
        raise ValueError("models are not nested")
    df = fit_large.p - fit_small.p
    stat = max(0.0, 2.0 * (fit_large.loglik - fit_small.loglik))
    p = float(chi2.sf(stat, df)) if df > 0 else 1.0
    return LRTResult(chi2=stat, df=df, p_value=p)
