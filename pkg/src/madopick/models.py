"""Max-stable test models: ground-truth dependence functions and exact samplers.

All samplers produce i.i.d. draws with unit Frechet margins and the model's
extreme-value copula, from an explicit integer seed (no global RNG state).

Families
--------
symmetric-logistic
    A(w) = (sum_i w_i^(1/alpha))^alpha, alpha in (0, 1]; sampled through the
    positive-stable mixture (Chambers-Mallows-Stuck transform).
asymmetric-logistic
    Mixture over weighted "faces" (subsets of coordinates), each face carrying
    its own logistic dependence parameter; per-coordinate face weights sum to 1.
huesler-reiss
    Parameterized by a symmetric matrix of pairwise dependence parameters
    lambda_ij > 0 (small = strong dependence).  Closed-form dependence function
    for d in {2, 3}; exact sampling for any d via extremal functions with
    log-Gaussian profiles.
"""

import math
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np
from scipy.special import ndtr

from .bernstein import validate_simplex_points

FAMILIES = ("symmetric-logistic", "asymmetric-logistic", "huesler-reiss")


@dataclass(frozen=True)
class ModelSpec:
    family: str
    d: int
    params: MappingProxyType


def symmetric_logistic(d, alpha):
    """Exchangeable logistic model; alpha = 1 is independence, alpha -> 0 complete dependence."""
    if d < 2:
        raise ValueError("dimension must be >= 2")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"symmetric-logistic dependence parameter must be in (0, 1], got {alpha!r}")
    return ModelSpec("symmetric-logistic", int(d), MappingProxyType({"alpha": float(alpha)}))


def asymmetric_logistic(d, faces):
    """Asymmetric logistic model from ``faces = [(members, alpha, weights), ...]``.

    ``members`` are 0-based coordinate indices, ``alpha`` the face's logistic
    parameter in (0, 1], ``weights`` the asymmetry weights of the members.  For
    every coordinate the weights of the faces containing it must sum to 1.
    """
    if d < 2:
        raise ValueError("dimension must be >= 2")
    norm_faces = []
    totals = np.zeros(d)
    for members, alpha, weights in faces:
        members = tuple(int(i) for i in members)
        weights = tuple(float(t) for t in weights)
        if len(members) == 0 or len(set(members)) != len(members):
            raise ValueError(f"face members must be distinct and nonempty, got {members}")
        if sorted(members) != list(members):
            raise ValueError(f"face members must be sorted, got {members}")
        if any(i < 0 or i >= d for i in members):
            raise ValueError(f"face members out of range for d={d}: {members}")
        if len(weights) != len(members) or any(t <= 0.0 for t in weights):
            raise ValueError(f"face needs one positive weight per member, got {weights}")
        if not 0.0 < alpha <= 1.0:
            raise ValueError(f"face dependence parameter must be in (0, 1], got {alpha!r}")
        for i, t in zip(members, weights):
            totals[i] += t
        norm_faces.append((members, float(alpha), weights))
    if np.max(np.abs(totals - 1.0)) > 1e-10:
        raise ValueError(f"per-coordinate face weights must sum to 1, got totals {totals}")
    return ModelSpec("asymmetric-logistic", int(d), MappingProxyType({"faces": tuple(norm_faces)}))


def huesler_reiss(d, lam):
    """Huesler-Reiss model from a symmetric (d, d) matrix of pairwise parameters."""
    if d < 2:
        raise ValueError("dimension must be >= 2")
    lam = np.asarray(lam, dtype=np.float64)
    if lam.shape != (d, d) or not np.allclose(lam, lam.T):
        raise ValueError(f"need a symmetric ({d}, {d}) parameter matrix")
    off = lam[~np.eye(d, dtype=bool)]
    if np.any(off <= 0.0):
        raise ValueError("pairwise parameters must be positive")
    # variogram of the underlying log-Gaussian profiles; must embed in a
    # valid covariance when anchored at any coordinate
    gamma = 4.0 * lam**2
    np.fill_diagonal(gamma, 0.0)
    for anchor in range(d):
        sigma = _anchored_covariance(gamma, anchor)
        if np.min(np.linalg.eigvalsh(sigma)) < -1e-10:
            raise ValueError("parameter matrix is not a valid dependence structure")
    lam = lam.copy()
    lam.setflags(write=False)
    return ModelSpec("huesler-reiss", int(d), MappingProxyType({"lam": lam}))


def pairwise_huesler_reiss(lam12):
    """Convenience bivariate Huesler-Reiss spec."""
    return huesler_reiss(2, np.array([[0.0, lam12], [lam12, 0.0]]))


def _anchored_covariance(gamma, anchor):
    idx = [j for j in range(len(gamma)) if j != anchor]
    g_a = gamma[idx, anchor]
    return 0.5 * (g_a[:, None] + g_a[None, :] - gamma[np.ix_(idx, idx)])


# --- dependence functions ---------------------------------------------------


def true_pickands(model, w):
    """Ground-truth Pickands dependence function value of a test model at w."""
    return float(true_pickands_many(model, np.asarray(w, dtype=np.float64)[None, :])[0])


def true_pickands_many(model, points):
    points = validate_simplex_points(points, model.d)
    if model.family == "symmetric-logistic":
        alpha = model.params["alpha"]
        return np.sum(points ** (1.0 / alpha), axis=1) ** alpha
    if model.family == "asymmetric-logistic":
        out = np.zeros(len(points))
        for members, alpha, weights in model.params["faces"]:
            scaled = points[:, members] * np.asarray(weights)
            out += np.sum(scaled ** (1.0 / alpha), axis=1) ** alpha
        return out
    if model.family == "huesler-reiss":
        return np.array([_hr_pickands(model.params["lam"], w) for w in points])
    raise ValueError(f"unsupported model family {model.family!r}")


def _hr_pickands(lam, w):
    support = np.flatnonzero(w > 0.0)
    if len(support) == 1:
        return 1.0
    if len(support) < len(w):
        sub = lam[np.ix_(support, support)]
        return _hr_pickands(sub, w[support])
    d = len(w)
    if d == 2:
        l = lam[0, 1]
        ratio = math.log(w[0] / w[1])
        return float(
            w[0] * ndtr(l + ratio / (2.0 * l)) + w[1] * ndtr(l - ratio / (2.0 * l))
        )
    if d == 3:
        total = 0.0
        for i in range(3):
            j, k = [m for m in range(3) if m != i]
            lij, lik, ljk = lam[i, j], lam[i, k], lam[j, k]
            x = lij + math.log(w[i] / w[j]) / (2.0 * lij)
            y = lik + math.log(w[i] / w[k]) / (2.0 * lik)
            rho = (lij**2 + lik**2 - ljk**2) / (2.0 * lij * lik)
            total += w[i] * bivariate_normal_cdf(x, y, rho)
        return float(total)
    raise ValueError("closed-form Huesler-Reiss dependence function implemented for d <= 3 only")


# --- bivariate normal CDF ---------------------------------------------------

# Gauss-Legendre half-rules used by the Drezner-Wesolowsky/Genz quadrature
_GL_RULES = (
    (
        np.array([0.1713244923791705, 0.3607615730481384, 0.4679139345726904]),
        np.array([0.9324695142031522, 0.6612093864662647, 0.2386191860831970]),
    ),
    (
        np.array(
            [
                0.04717533638651177,
                0.1069393259953183,
                0.1600783285433464,
                0.2031674267230659,
                0.2334925365383547,
                0.2491470458134029,
            ]
        ),
        np.array(
            [
                0.9815606342467191,
                0.9041172563704750,
                0.7699026741943050,
                0.5873179542866171,
                0.3678314989981802,
                0.1252334085114692,
            ]
        ),
    ),
    (
        np.array(
            [
                0.01761400713915212,
                0.04060142980038694,
                0.06267204833410906,
                0.08327674157670475,
                0.1019301198172404,
                0.1181945319615184,
                0.1316886384491766,
                0.1420961093183821,
                0.1491729864726037,
                0.1527533871307259,
            ]
        ),
        np.array(
            [
                0.9931285991850949,
                0.9639719272779138,
                0.9122344282513259,
                0.8391169718222188,
                0.7463319064601508,
                0.6360536807265150,
                0.5108670019508271,
                0.3737060887154196,
                0.2277858511416451,
                0.07652652113349733,
            ]
        ),
    ),
)


def _bvn_upper(h, k, r):
    """P(X > h, Y > k) for a standard bivariate normal pair with correlation r."""
    if abs(r) < 0.3:
        weights, nodes = _GL_RULES[0]
    elif abs(r) < 0.75:
        weights, nodes = _GL_RULES[1]
    else:
        weights, nodes = _GL_RULES[2]
    hk = h * k
    bvn = 0.0
    if abs(r) < 0.925:
        hs = (h * h + k * k) / 2.0
        asr = math.asin(r)
        for w_i, x_i in zip(weights, nodes):
            for sign in (-1.0, 1.0):
                sn = math.sin(asr * (1.0 + sign * x_i) / 2.0)
                bvn += w_i * math.exp((sn * hk - hs) / (1.0 - sn * sn))
        bvn = bvn * asr / (4.0 * math.pi) + ndtr(-h) * ndtr(-k)
        return max(0.0, min(1.0, bvn))
    if r < 0.0:
        k = -k
        hk = -hk
    if abs(r) < 1.0:
        a_sq = (1.0 - r) * (1.0 + r)
        a = math.sqrt(a_sq)
        b_sq = (h - k) ** 2
        c = (4.0 - hk) / 8.0
        dd = (12.0 - hk) / 16.0
        asr = -(b_sq / a_sq + hk) / 2.0
        if asr > -100.0:
            bvn = a * math.exp(asr) * (
                1.0 - c * (b_sq - a_sq) * (1.0 - dd * b_sq / 5.0) / 3.0
                + c * dd * a_sq * a_sq / 5.0
            )
        if -hk < 100.0:
            b = math.sqrt(b_sq)
            bvn -= (
                math.exp(-hk / 2.0)
                * math.sqrt(2.0 * math.pi)
                * ndtr(-b / a)
                * b
                * (1.0 - c * b_sq * (1.0 - dd * b_sq / 5.0) / 3.0)
            )
        a /= 2.0
        for w_i, x_i in zip(weights, nodes):
            for sign in (-1.0, 1.0):
                x_sq = (a * (sign * x_i + 1.0)) ** 2
                rs = math.sqrt(1.0 - x_sq)
                asr = -(b_sq / x_sq + hk) / 2.0
                if asr > -100.0:
                    bvn += (
                        a
                        * w_i
                        * math.exp(asr)
                        * (
                            math.exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs
                            - (1.0 + c * x_sq * (1.0 + dd * x_sq))
                        )
                    )
        bvn = -bvn / (2.0 * math.pi)
    if r > 0.0:
        bvn += ndtr(-max(h, k))
    else:
        bvn = -bvn
        if k > h:
            bvn += ndtr(k) - ndtr(h)
    return max(0.0, min(1.0, bvn))


def bivariate_normal_cdf(x, y, rho):
    """P(X <= x, Y <= y) for standard normal margins with correlation rho."""
    if not -1.0 <= rho <= 1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {rho!r}")
    if math.isinf(x) or math.isinf(y):
        if x == -math.inf or y == -math.inf:
            return 0.0
        if x == math.inf:
            return float(ndtr(y))
        return float(ndtr(x))
    if rho == 1.0:
        return float(ndtr(min(x, y)))
    if rho == -1.0:
        return float(max(0.0, ndtr(x) + ndtr(y) - 1.0))
    return float(_bvn_upper(-x, -y, rho))


# --- samplers ----------------------------------------------------------------


def _positive_stable(alpha, size, rng):
    """Positive alpha-stable draws with Laplace transform exp(-t^alpha), 0 < alpha < 1."""
    u = rng.uniform(0.0, math.pi, size)
    w = rng.standard_exponential(size)
    return (
        (np.sin((1.0 - alpha) * u) / w) ** ((1.0 - alpha) / alpha)
        * np.sin(alpha * u)
        / np.sin(u) ** (1.0 / alpha)
    )


def _sample_logistic_block(n, size, alpha, rng):
    if alpha == 1.0:
        return 1.0 / rng.standard_exponential((n, size))
    s = _positive_stable(alpha, n, rng)
    e = rng.standard_exponential((n, size))
    return (s[:, None] / e) ** alpha


def _sample_asymmetric_logistic(model, n, rng):
    out = np.zeros((n, model.d))
    for members, alpha, weights in model.params["faces"]:
        block = _sample_logistic_block(n, len(members), alpha, rng)
        block *= np.asarray(weights)
        out[:, members] = np.maximum(out[:, members], block)
    return out


def _sample_huesler_reiss(model, n, rng):
    """Exact max-stable sampling via extremal functions with log-Gaussian profiles."""
    d = model.d
    gamma = 4.0 * model.params["lam"] ** 2
    np.fill_diagonal(gamma, 0.0)
    roots = []
    for anchor in range(d):
        sigma = _anchored_covariance(gamma, anchor)
        vals, vecs = np.linalg.eigh(sigma)
        roots.append(vecs * np.sqrt(np.clip(vals, 0.0, None)))
    out = np.empty((n, d))
    for row in range(n):
        z = np.zeros(d)
        for anchor in range(d):
            others = [j for j in range(d) if j != anchor]
            arrival = rng.standard_exponential()
            while 1.0 / arrival > z[anchor]:
                g = np.zeros(d)
                g[others] = roots[anchor] @ rng.standard_normal(d - 1)
                profile = np.exp(g - gamma[:, anchor] / 2.0)
                candidate = profile / arrival
                if np.all(candidate[:anchor] < z[:anchor]):
                    np.maximum(z, candidate, out=z)
                arrival += rng.standard_exponential()
        out[row] = z
    return out


def sample(model, n, seed):
    """n i.i.d. draws from the model's max-stable distribution (unit Frechet margins)."""
    if n < 1:
        raise ValueError("need n >= 1 draws")
    rng = np.random.default_rng(seed)
    if model.family == "symmetric-logistic":
        return _sample_logistic_block(n, model.d, model.params["alpha"], rng)
    if model.family == "asymmetric-logistic":
        return _sample_asymmetric_logistic(model, n, rng)
    if model.family == "huesler-reiss":
        return _sample_huesler_reiss(model, n, rng)
    raise ValueError(f"unsupported model family {model.family!r}")
