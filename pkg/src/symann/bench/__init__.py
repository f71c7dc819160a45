"""Harness: planted instances, bench runs, invariant suites, lower-bound demo and the CLI."""
from .config import ConfigError, RunConfig
from .lowerbound import lowerbound_demo
from .planted import PlantedInstance, RejectionBudgetExceeded, gen_planted
from .run import BenchReport, run_bench
from .verify import SUITES, verify
