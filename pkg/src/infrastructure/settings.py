"""Environment configuration (an optional .env file is loaded first)."""

import os
from dataclasses import dataclass

from dotenv import load_dotenv

load_dotenv()


@dataclass(frozen=True)
class Settings:
    max_states: int = 10_000
    closure_bound: int = 10_000
    max_params: int = 64
    max_cases: int = 128
    max_depth: int = 10_000
    max_nodes: int = 1_000_000
    log_level: str = "WARNING"
    output_dir: str = "artifacts"

    @classmethod
    def from_env(cls) -> "Settings":
        return cls(
            max_states=int(os.getenv("SLDDB_MAX_STATES", cls.max_states)),
            closure_bound=int(os.getenv("SLDDB_CLOSURE_BOUND", cls.closure_bound)),
            max_params=int(os.getenv("SLDDB_MAX_PARAMS", cls.max_params)),
            max_cases=int(os.getenv("SLDDB_MAX_CASES", cls.max_cases)),
            max_depth=int(os.getenv("SLDDB_MAX_DEPTH", cls.max_depth)),
            max_nodes=int(os.getenv("SLDDB_MAX_NODES", cls.max_nodes)),
            log_level=os.getenv("SLDDB_LOG_LEVEL", cls.log_level).upper(),
            output_dir=os.getenv("OUTPUT_DIR", cls.output_dir),
        )
