"""Contextual bandit policies: LinTS, LinUCB and LogUCB.

All three maintain ridge-regression style linear state (A, A_inv, b, theta).
LinTS and LinUCB keep one model per arm; LogUCB keeps a single shared model
scored against arm-specific contexts.  The inverse is maintained with
rank-one (Sherman-Morrison) updates and periodically re-inverted from
scratch to bound drift.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ContractError, NumericalStateError

POLICY_KINDS = ("LinTS", "LinUCB", "LogUCB")

DEFAULT_ARM_NAMES = (
    "EmpathicResponding",
    "Distraction",
    "Avoidance",
    "Expression",
    "Relaxation",
)

#: How small a negative radicand may be before it is treated as a real
#: SPD violation rather than round-off.
RADICAND_TOLERANCE = 1e-12

#: Full re-inversion cadence for the maintained inverse.
REINVERT_EVERY = 10_000

SERIALIZATION_VERSION = 1


@dataclass(frozen=True)
class StrategyArm:
    """One selectable action (an emotion-regulation strategy)."""

    id: int
    name: str


def default_arms(names=DEFAULT_ARM_NAMES) -> list[StrategyArm]:
    return [StrategyArm(i, name) for i, name in enumerate(names)]


@dataclass
class LinearModelState:
    """Ridge-regression accumulator state for one linear model.

    A is the design/covariance accumulator, A_inv its maintained inverse,
    b the reward accumulator and theta = A_inv @ b the solved parameters.
    """

    A: np.ndarray
    A_inv: np.ndarray
    b: np.ndarray
    theta: np.ndarray
    update_count: int = 0

    @classmethod
    def initial(cls, d: int, scale: float) -> "LinearModelState":
        A = scale * np.eye(d)
        return cls(A=A, A_inv=np.eye(d) / scale, b=np.zeros(d), theta=np.zeros(d))

    @property
    def d(self) -> int:
        return self.b.shape[0]

    def copy(self) -> "LinearModelState":
        return LinearModelState(
            A=self.A.copy(),
            A_inv=self.A_inv.copy(),
            b=self.b.copy(),
            theta=self.theta.copy(),
            update_count=self.update_count,
        )


@dataclass
class PolicyState:
    """Full state of one bandit policy.

    LinTS/LinUCB hold one model per arm; LogUCB holds exactly one shared
    model.  The rng drives LinTS posterior sampling and is part of the
    deterministic state.
    """

    kind: str
    arms: list[StrategyArm]
    d: int
    alpha: float
    lam: float
    seed: int
    models: list[LinearModelState]
    rng: np.random.Generator = field(repr=False, default=None)
    update_count: int = 0

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    def model_for(self, arm_id: int) -> LinearModelState:
        if self.kind == "LogUCB":
            return self.models[0]
        return self.models[arm_id]

    def copy(self) -> "PolicyState":
        clone = PolicyState(
            kind=self.kind,
            arms=list(self.arms),
            d=self.d,
            alpha=self.alpha,
            lam=self.lam,
            seed=self.seed,
            models=[m.copy() for m in self.models],
            update_count=self.update_count,
        )
        clone.rng = np.random.default_rng()
        clone.rng.bit_generator.state = self.rng.bit_generator.state
        return clone


def init_policy(
    kind: str,
    arms,
    d: int,
    alpha: float = 1.0,
    lam: float = 1.0,
    seed: int = 0,
) -> PolicyState:
    """Create a freshly initialised policy.

    ``arms`` may be an arm count or a list of StrategyArm.  LinUCB models
    start from the identity; LinTS and LogUCB start from lam * identity.
    """
    if kind not in POLICY_KINDS:
        raise ConfigurationError(f"unknown policy kind {kind!r}")
    if isinstance(arms, int):
        if arms < 1:
            raise ConfigurationError(f"arm count must be >= 1, got {arms}")
        arm_list = [StrategyArm(i, f"arm_{i}") for i in range(arms)]
    else:
        arm_list = list(arms)
        if not arm_list:
            raise ConfigurationError("empty arm list")
        if [a.id for a in arm_list] != list(range(len(arm_list))):
            raise ConfigurationError("arm ids must be dense 0..A-1")
    if d < 1:
        raise ConfigurationError(f"context dimension must be >= 1, got {d}")
    if lam <= 0:
        raise ConfigurationError(f"lambda must be positive, got {lam}")
    if alpha < 0:
        raise ConfigurationError(f"alpha must be nonnegative, got {alpha}")

    scale = 1.0 if kind == "LinUCB" else float(lam)
    n_models = 1 if kind == "LogUCB" else len(arm_list)
    models = [LinearModelState.initial(d, scale) for _ in range(n_models)]
    return PolicyState(
        kind=kind,
        arms=arm_list,
        d=d,
        alpha=float(alpha),
        lam=float(lam),
        seed=int(seed),
        models=models,
        rng=np.random.default_rng(int(seed)),
    )


def _check_context(model: LinearModelState, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.d,):
        raise ContractError(f"context has shape {x.shape}, expected ({model.d},)")
    if not np.all(np.isfinite(x)):
        raise ContractError("context contains NaN/Inf")
    return x


def _confidence_radicand(model: LinearModelState, x: np.ndarray) -> float:
    q = float(x @ model.A_inv @ x)
    if q < 0.0:
        if q < -RADICAND_TOLERANCE:
            raise NumericalStateError(f"negative radicand {q}: A_inv is not PSD")
        q = 0.0
    return q


def linucb_score(model: LinearModelState, x, alpha: float) -> float:
    """UCB score x'theta + alpha * sqrt(x' A_inv x)."""
    x = _check_context(model, x)
    return float(x @ model.theta) + alpha * np.sqrt(_confidence_radicand(model, x))


def logucb_score(shared: LinearModelState, x_a, alpha: float) -> float:
    """UCB score of an arm-specific context against the shared model."""
    return linucb_score(shared, x_a, alpha)


def lints_score(model: LinearModelState, x, rng: np.random.Generator) -> float:
    """Thompson sample: draw theta ~ N(mean, A_inv) and return x'theta.

    The draw uses the lower Cholesky factor of A_inv, so identical rng
    states give identical scores.
    """
    x = _check_context(model, x)
    try:
        chol = np.linalg.cholesky(model.A_inv)
    except np.linalg.LinAlgError as exc:
        raise NumericalStateError("Cholesky of A_inv failed") from exc
    theta = model.theta + chol @ rng.standard_normal(model.d)
    return float(x @ theta)


def predicted_click_probability(policy: PolicyState, arm_id: int, x) -> float:
    """Greedy predicted reward, passed through a sigmoid for LogUCB only."""
    model = policy.model_for(arm_id)
    raw = linucb_score(model, x, 0.0)
    if policy.kind == "LogUCB":
        return float(1.0 / (1.0 + np.exp(-raw)))
    return raw


def score_arm(policy: PolicyState, arm_id: int, x, rng=None) -> float:
    """Score one arm under the policy's own rule."""
    model = policy.model_for(arm_id)
    if policy.kind == "LinUCB" or policy.kind == "LogUCB":
        return linucb_score(model, x, policy.alpha)
    return lints_score(model, x, rng if rng is not None else policy.rng)


def select_arm(policy: PolicyState, contexts, rng=None) -> StrategyArm:
    """Pick argmax of per-arm scores; ties go to the lowest arm id.

    ``contexts`` maps arm id -> context (a list indexed by arm id or a
    dict); exactly one context per arm is required.
    """
    if isinstance(contexts, dict):
        try:
            per_arm = [contexts[a.id] for a in policy.arms]
        except KeyError as exc:
            raise ContractError(f"missing context for arm {exc.args[0]}") from exc
    else:
        per_arm = list(contexts)
        if len(per_arm) != policy.n_arms:
            raise ContractError(
                f"got {len(per_arm)} contexts for {policy.n_arms} arms"
            )
    best_arm = None
    best_score = -np.inf
    for arm, x in zip(policy.arms, per_arm):
        s = score_arm(policy, arm.id, x, rng=rng)
        if s > best_score:
            best_arm, best_score = arm, s
    return best_arm


def update(policy: PolicyState, arm: StrategyArm, x, r) -> PolicyState:
    """Apply one observed (arm, context, binary reward) event in place.

    A += x x', b += r x, A_inv via Sherman-Morrison, theta = A_inv b.
    Returns the policy for convenience.
    """
    if r not in (0, 1):
        raise ContractError(f"reward must be 0 or 1, got {r!r}")
    arm_id = arm.id if isinstance(arm, StrategyArm) else int(arm)
    if not 0 <= arm_id < policy.n_arms:
        raise ContractError(f"arm id {arm_id} out of range")
    model = policy.model_for(arm_id)
    x = _check_context(model, x)

    model.A += np.outer(x, x)
    model.b += float(r) * x
    v = model.A_inv @ x
    model.A_inv -= np.outer(v, v) / (1.0 + float(x @ v))
    model.update_count += 1
    if model.update_count % REINVERT_EVERY == 0:
        model.A_inv = np.linalg.inv(model.A)
    model.theta = model.A_inv @ model.b
    policy.update_count += 1
    return policy


# ---------------------------------------------------------------------------
# Serialization


def policy_to_dict(policy: PolicyState) -> dict:
    return {
        "version": SERIALIZATION_VERSION,
        "kind": policy.kind,
        "arms": [{"id": a.id, "name": a.name} for a in policy.arms],
        "d": policy.d,
        "alpha": policy.alpha,
        "lambda": policy.lam,
        "seed": policy.seed,
        "update_count": policy.update_count,
        "models": [
            {
                "A": m.A.ravel().tolist(),
                "b": m.b.tolist(),
                "update_count": m.update_count,
            }
            for m in policy.models
        ],
    }


def policy_from_dict(payload: dict) -> PolicyState:
    if payload.get("version") != SERIALIZATION_VERSION:
        raise ConfigurationError(
            f"unsupported policy state version {payload.get('version')!r}"
        )
    arms = [StrategyArm(a["id"], a["name"]) for a in payload["arms"]]
    policy = init_policy(
        payload["kind"],
        arms,
        payload["d"],
        alpha=payload["alpha"],
        lam=payload["lambda"],
        seed=payload["seed"],
    )
    d = policy.d
    for model, blob in zip(policy.models, payload["models"], strict=True):
        model.A = np.array(blob["A"], dtype=float).reshape(d, d)
        model.b = np.array(blob["b"], dtype=float)
        model.A_inv = np.linalg.inv(model.A)
        model.theta = model.A_inv @ model.b
        model.update_count = int(blob["update_count"])
    policy.update_count = int(payload["update_count"])
    return policy


def save_policy(policy: PolicyState, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(policy_to_dict(policy), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_policy(path) -> PolicyState:
    with open(path, encoding="utf-8") as fh:
        return policy_from_dict(json.load(fh))
