"""
Process-level settings for the workbench
Budgets and worker counts, read from the environment (a .env file is honoured)
"""

import os
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv

from pa_syntax import ConfigError, PAError

DEFAULT_STATE_BUDGET = 1_000_000
DEFAULT_POMSET_BUDGET = 12
DEFAULT_REWRITE_BUDGET = 1_000_000
DEFAULT_JOBS = 1


class BudgetExceededError(PAError):
    """A state, pomset or rewrite budget ran out; never turned into a verdict"""


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw.replace("_", ""))
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"{name} must be positive, got {value}")
    return value


@dataclass(frozen=True)
class Budgets:
    states: int = DEFAULT_STATE_BUDGET
    pomset: int = DEFAULT_POMSET_BUDGET
    rewrites: int = DEFAULT_REWRITE_BUDGET
    jobs: int = DEFAULT_JOBS

    @classmethod
    def from_env(cls, dotenv_path: Optional[str] = None) -> "Budgets":
        """
        Read PA_STATE_BUDGET, PA_POMSET_BUDGET, PA_REWRITE_BUDGET and PA_JOBS

        Values already present in the environment win over the .env file.
        """
        load_dotenv(dotenv_path)
        return cls(
            states=_env_int("PA_STATE_BUDGET", DEFAULT_STATE_BUDGET),
            pomset=_env_int("PA_POMSET_BUDGET", DEFAULT_POMSET_BUDGET),
            rewrites=_env_int("PA_REWRITE_BUDGET", DEFAULT_REWRITE_BUDGET),
            jobs=_env_int("PA_JOBS", DEFAULT_JOBS),
        )

    def override(self, states: Optional[int] = None, pomset: Optional[int] = None,
                 rewrites: Optional[int] = None, jobs: Optional[int] = None) -> "Budgets":
        return Budgets(
            states=states or self.states,
            pomset=pomset or self.pomset,
            rewrites=rewrites or self.rewrites,
            jobs=jobs or self.jobs,
        )


DEFAULT_BUDGETS = Budgets()
