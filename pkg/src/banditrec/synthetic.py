"""Seeded synthetic dataset generator with a planted linear reward model.

Each interaction carries a hidden context x (leading bias component plus
user and item latent normals).  The response is Bernoulli with
p = clamp01(x' theta_arm + c) for the linear surface or
sigmoid(x' theta_arm + c) for the sigmoid surface; the intercept c is
calibrated by bisection so the expected positive rate hits the target.
The hidden per-arm theta is returned for regret oracles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataio import Dataset, Interaction, PostRecord, UserRecord
from .errors import ConfigurationError, GenerationError
from .policies import DEFAULT_ARM_NAMES, PolicyState, StrategyArm, select_arm, update

#: Norm of each planted theta row for the linear surface.
THETA_SCALE = {"linear": 0.25, "sigmoid": None}

_CALIBRATION_TOL = 2e-3
_CALIBRATION_STEPS = 100


@dataclass
class SyntheticConfig:
    n_users: int = 50
    n_items: int = 100
    n_interactions: int = 1000
    d_latent: int = 6
    positive_rate_target: float = 0.36
    reward_surface: str = "linear"
    seed: int = 0
    arm_names: tuple = DEFAULT_ARM_NAMES

    def validate(self) -> None:
        if self.n_users < 1 or self.n_items < 1 or self.n_interactions < 1:
            raise ConfigurationError("n_users, n_items, n_interactions must be >= 1")
        if self.d_latent < 2:
            raise ConfigurationError("d_latent must be >= 2")
        if not 0.0 < self.positive_rate_target < 1.0:
            raise ConfigurationError("positive_rate_target must be in (0, 1)")
        if self.reward_surface not in THETA_SCALE:
            raise ConfigurationError(
                f"reward_surface must be linear or sigmoid, got {self.reward_surface!r}"
            )
        if len(self.arm_names) < 2:
            raise ConfigurationError("need at least 2 arms")


@dataclass
class SyntheticTruth:
    """Hidden generative state needed by regret oracles."""

    theta: np.ndarray  # (n_arms, d_latent)
    intercept: float
    surface: str
    contexts: np.ndarray  # (n_interactions, d_latent)
    logged_arms: np.ndarray  # (n_interactions,)
    arms: list[StrategyArm] = field(default_factory=list)

    def prob(self, x: np.ndarray, arm_id: int) -> float:
        z = float(x @ self.theta[arm_id]) + self.intercept
        if self.surface == "linear":
            return float(np.clip(z, 0.0, 1.0))
        return float(1.0 / (1.0 + np.exp(-z)))

    def arm_probs(self, x: np.ndarray) -> np.ndarray:
        return np.array([self.prob(x, a.id) for a in self.arms])


def _calibrate_intercept(z_logged: np.ndarray, surface: str, target: float) -> float:
    def mean_p(c: float) -> float:
        if surface == "linear":
            return float(np.mean(np.clip(z_logged + c, 0.0, 1.0)))
        return float(np.mean(1.0 / (1.0 + np.exp(-(z_logged + c)))))

    lo, hi = -30.0, 30.0
    c = 0.0
    for _ in range(_CALIBRATION_STEPS):
        c = (lo + hi) / 2.0
        rate = mean_p(c)
        if abs(rate - target) <= _CALIBRATION_TOL:
            return c
        if rate < target:
            lo = c
        else:
            hi = c
    raise GenerationError(
        f"intercept calibration did not reach target {target} "
        f"within {_CALIBRATION_STEPS} bisection steps"
    )


def generate_synthetic(cfg: SyntheticConfig) -> tuple[Dataset, SyntheticTruth]:
    """Pure function of the config: dataset plus hidden truth."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    arms = [StrategyArm(i, name) for i, name in enumerate(cfg.arm_names)]
    n_arms = len(arms)
    du = (cfg.d_latent + 1) // 2  # user block, leading bias included
    dv = cfg.d_latent - du

    users: dict[str, UserRecord] = {}
    for i in range(cfg.n_users):
        uid = f"u{i:05d}"
        vec = np.concatenate(([1.0], rng.standard_normal(du - 1)))
        users[uid] = UserRecord(
            user_id=uid,
            karma=int(rng.integers(0, 10_000)),
            subreddits={f"synth_{arms[int(rng.integers(n_arms))].name}"},
            vector=vec,
        )

    items: dict[str, PostRecord] = {}
    for i in range(cfg.n_items):
        iid = f"i{i:05d}"
        arm = arms[int(rng.integers(n_arms))]
        items[iid] = PostRecord(
            item_id=iid,
            author="synthetic",
            title="",
            text="",
            subreddit=f"synth_{arm.name}",
            score=int(rng.integers(0, 1000)),
            upvote_ratio=float(rng.uniform()),
            num_comments=int(rng.integers(0, 100)),
            comments=[],
            strategy=arm,
            vector=rng.standard_normal(dv),
        )

    if cfg.reward_surface == "linear":
        theta = rng.standard_normal((n_arms, cfg.d_latent))
        theta *= THETA_SCALE["linear"] / np.linalg.norm(theta, axis=1, keepdims=True)
    else:
        # Sigmoid surface: strategies differ in population-level
        # effectiveness (per-arm bias on the leading constant component)
        # and in content effects (item block), while user susceptibility
        # is shared across arms.
        theta = np.zeros((n_arms, cfg.d_latent))
        shared_user = rng.standard_normal(du - 1)
        if du > 1:
            shared_user /= np.linalg.norm(shared_user)
        for arm in arms:
            theta[arm.id, 0] = rng.uniform(-1.0, 1.0)
            theta[arm.id, 1:du] = shared_user
            if dv:
                q = rng.standard_normal(dv)
                theta[arm.id, du:] = 0.8 * q / np.linalg.norm(q)

    user_ids = sorted(users)
    item_ids = sorted(items)
    chosen_users = rng.integers(0, cfg.n_users, size=cfg.n_interactions)
    chosen_items = rng.integers(0, cfg.n_items, size=cfg.n_interactions)
    contexts = np.empty((cfg.n_interactions, cfg.d_latent))
    logged_arms = np.empty(cfg.n_interactions, dtype=int)
    for t in range(cfg.n_interactions):
        u = users[user_ids[chosen_users[t]]]
        v = items[item_ids[chosen_items[t]]]
        contexts[t] = np.concatenate((u.vector, v.vector))
        logged_arms[t] = v.strategy.id

    z_logged = np.einsum("td,td->t", contexts, theta[logged_arms])
    intercept = _calibrate_intercept(
        z_logged, cfg.reward_surface, cfg.positive_rate_target
    )

    truth = SyntheticTruth(
        theta=theta,
        intercept=intercept,
        surface=cfg.reward_surface,
        contexts=contexts,
        logged_arms=logged_arms,
        arms=arms,
    )
    interactions = []
    for t in range(cfg.n_interactions):
        p = truth.prob(contexts[t], int(logged_arms[t]))
        interactions.append(
            Interaction(
                user_id=user_ids[chosen_users[t]],
                item_id=item_ids[chosen_items[t]],
                response=int(rng.uniform() < p),
                timestamp=t,
            )
        )
    ds = Dataset(users=users, items=items, interactions=interactions)
    return ds, truth


def run_online(policy: PolicyState, truth: SyntheticTruth, seed: int = 0):
    """Play the policy against the hidden truth, one round per context.

    Every arm sees the same context each round.  Returns (rewards,
    regrets) arrays; regret is the expected-reward gap to the oracle
    best arm.
    """
    rng = np.random.default_rng(seed)
    n = truth.contexts.shape[0]
    rewards = np.empty(n)
    regrets = np.empty(n)
    for t in range(n):
        x = truth.contexts[t]
        contexts = [x] * len(truth.arms)
        arm = select_arm(policy, contexts)
        probs = truth.arm_probs(x)
        r = int(rng.uniform() < probs[arm.id])
        update(policy, arm, x, r)
        rewards[t] = r
        regrets[t] = float(probs.max() - probs[arm.id])
    return rewards, regrets
