from functools import lru_cache
from typing import Literal

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    log_level: str = "INFO"
    n_jobs: int = 1
    reps: int = 1000
    alpha: float = 0.05
    seed: int = 0
    weight_law: Literal["rademacher", "normal"] = "rademacher"
    rank_tol: float = 1e-10  # relative to the largest singular value
    run_slow: bool = False

    model_config = {"env_file": ".env", "env_file_encoding": "utf-8", "env_prefix": "SURVTEST_"}


@lru_cache
def get_settings() -> Settings:
    return Settings()
