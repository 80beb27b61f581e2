"""INI-style run configuration with strict key validation.

Every key is validated before any work starts; unknown sections or keys
are rejected.  CLI flags override file values, and the BANDITREC_SEED
environment variable overrides the configured seed.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigurationError
from .policies import DEFAULT_ARM_NAMES, POLICY_KINDS

_SCHEMA = {
    "policy": {"name", "alpha", "lambda", "seed"},
    "eval": {"folds", "top_k_max"},
    "features": {"nmf_rank", "top_subreddits", "select_m"},
    "data": {"users", "posts", "interactions", "lexicon", "embeddings"},
    "arms": {"strategy_map", "default_strategy", "names"},
    "synthetic": {
        "n_users",
        "n_items",
        "n_interactions",
        "d_latent",
        "positive_rate_target",
        "reward_surface",
    },
}


@dataclass
class RunConfig:
    policy_name: str = "all"
    alpha: float = 1.0
    lam: float = 1.0
    seed: int = 0
    folds: int = 5
    top_k_max: int = 10
    nmf_rank: int = 16
    top_subreddits: int = 120
    select_m: int = 50
    users_path: str | None = None
    posts_path: str | None = None
    interactions_path: str | None = None
    lexicon_path: str | None = None
    embeddings_path: str | None = None
    strategy_map_path: str | None = None
    default_strategy: str = "Distraction"
    arm_names: tuple = DEFAULT_ARM_NAMES
    syn_n_users: int = 50
    syn_n_items: int = 100
    syn_n_interactions: int = 1000
    syn_d_latent: int = 6
    syn_positive_rate_target: float = 0.36
    syn_reward_surface: str = "linear"

    def policy_names(self) -> list[str]:
        if self.policy_name == "all":
            return list(POLICY_KINDS)
        return [self.policy_name]

    def validate(self) -> None:
        if self.policy_name != "all" and self.policy_name not in POLICY_KINDS:
            raise ConfigurationError(
                f"policy.name must be one of {POLICY_KINDS} or 'all', "
                f"got {self.policy_name!r}"
            )
        if self.alpha < 0:
            raise ConfigurationError("policy.alpha must be >= 0")
        if self.lam <= 0:
            raise ConfigurationError("policy.lambda must be > 0")
        if self.folds < 2:
            raise ConfigurationError("eval.folds must be >= 2")
        if self.top_k_max < 1:
            raise ConfigurationError("eval.top_k_max must be >= 1")
        for name, value in (
            ("features.nmf_rank", self.nmf_rank),
            ("features.top_subreddits", self.top_subreddits),
            ("features.select_m", self.select_m),
        ):
            if value < 1:
                raise ConfigurationError(f"{name} must be >= 1")
        if self.default_strategy not in self.arm_names:
            raise ConfigurationError(
                f"arms.default_strategy {self.default_strategy!r} is not an arm name"
            )
        if len(set(self.arm_names)) != len(self.arm_names) or len(self.arm_names) < 2:
            raise ConfigurationError("arms.names must be >= 2 distinct names")
        if self.syn_reward_surface not in ("linear", "sigmoid"):
            raise ConfigurationError(
                "synthetic.reward_surface must be linear or sigmoid"
            )
        if not 0.0 < self.syn_positive_rate_target < 1.0:
            raise ConfigurationError(
                "synthetic.positive_rate_target must be in (0, 1)"
            )
        for name, value in (
            ("synthetic.n_users", self.syn_n_users),
            ("synthetic.n_items", self.syn_n_items),
            ("synthetic.n_interactions", self.syn_n_interactions),
        ):
            if value < 1:
                raise ConfigurationError(f"{name} must be >= 1")
        if self.syn_d_latent < 2:
            raise ConfigurationError("synthetic.d_latent must be >= 2")


def _get(parser, section, key, cast, current, where):
    if not parser.has_option(section, key):
        return current
    raw = parser.get(section, key)
    try:
        return cast(raw)
    except ValueError as exc:
        raise ConfigurationError(f"{where}: [{section}] {key}: {exc}") from exc


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Parse an INI config file; ``overrides`` wins over file values.

    Relative data paths resolve against the config file's directory.
    """
    cfg = RunConfig()
    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigurationError(f"config file {path} not found")
        where = str(path)
        for section in parser.sections():
            if section not in _SCHEMA:
                raise ConfigurationError(f"{where}: unknown section [{section}]")
            for key in parser.options(section):
                if key not in _SCHEMA[section]:
                    raise ConfigurationError(
                        f"{where}: unknown key {key!r} in [{section}]"
                    )
        base = Path(path).resolve().parent

        def _path(raw: str) -> str:
            p = Path(raw)
            return str(p if p.is_absolute() else base / p)

        cfg.policy_name = _get(parser, "policy", "name", str, cfg.policy_name, where)
        cfg.alpha = _get(parser, "policy", "alpha", float, cfg.alpha, where)
        cfg.lam = _get(parser, "policy", "lambda", float, cfg.lam, where)
        cfg.seed = _get(parser, "policy", "seed", int, cfg.seed, where)
        cfg.folds = _get(parser, "eval", "folds", int, cfg.folds, where)
        cfg.top_k_max = _get(parser, "eval", "top_k_max", int, cfg.top_k_max, where)
        cfg.nmf_rank = _get(parser, "features", "nmf_rank", int, cfg.nmf_rank, where)
        cfg.top_subreddits = _get(
            parser, "features", "top_subreddits", int, cfg.top_subreddits, where
        )
        cfg.select_m = _get(parser, "features", "select_m", int, cfg.select_m, where)
        cfg.users_path = _get(parser, "data", "users", _path, cfg.users_path, where)
        cfg.posts_path = _get(parser, "data", "posts", _path, cfg.posts_path, where)
        cfg.interactions_path = _get(
            parser, "data", "interactions", _path, cfg.interactions_path, where
        )
        cfg.lexicon_path = _get(
            parser, "data", "lexicon", _path, cfg.lexicon_path, where
        )
        cfg.embeddings_path = _get(
            parser, "data", "embeddings", _path, cfg.embeddings_path, where
        )
        cfg.strategy_map_path = _get(
            parser, "arms", "strategy_map", _path, cfg.strategy_map_path, where
        )
        cfg.default_strategy = _get(
            parser, "arms", "default_strategy", str, cfg.default_strategy, where
        )
        if parser.has_option("arms", "names"):
            cfg.arm_names = tuple(
                n.strip()
                for n in parser.get("arms", "names").split(",")
                if n.strip()
            )
        cfg.syn_n_users = _get(
            parser, "synthetic", "n_users", int, cfg.syn_n_users, where
        )
        cfg.syn_n_items = _get(
            parser, "synthetic", "n_items", int, cfg.syn_n_items, where
        )
        cfg.syn_n_interactions = _get(
            parser, "synthetic", "n_interactions", int, cfg.syn_n_interactions, where
        )
        cfg.syn_d_latent = _get(
            parser, "synthetic", "d_latent", int, cfg.syn_d_latent, where
        )
        cfg.syn_positive_rate_target = _get(
            parser,
            "synthetic",
            "positive_rate_target",
            float,
            cfg.syn_positive_rate_target,
            where,
        )
        cfg.syn_reward_surface = _get(
            parser, "synthetic", "reward_surface", str, cfg.syn_reward_surface, where
        )

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if not hasattr(cfg, key):
            raise ConfigurationError(f"unknown config override {key!r}")
        setattr(cfg, key, value)

    env_seed = os.environ.get("BANDITREC_SEED")
    if env_seed is not None:
        try:
            cfg.seed = int(env_seed)
        except ValueError as exc:
            raise ConfigurationError(f"BANDITREC_SEED: {exc}") from exc

    cfg.validate()
    return cfg
