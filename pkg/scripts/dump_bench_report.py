#!/usr/bin/env python3
"""Script to run the chain benchmark and dump the report to CSV and JSON."""

import logging
import os
import sys
from datetime import datetime

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.application.bench_service import CHAIN_PROGRAM, CHAIN_QUERY, ENGINES, BenchService
from src.infrastructure.parser import parse_program, parse_query
from src.infrastructure.report_writer import write_report
from src.infrastructure.settings import Settings

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)

logger = logging.getLogger(__name__)


def main():
    """Benchmark all engines on chains and write CSV and JSON artifacts."""
    try:
        settings = Settings.from_env()
        ns = [int(n) for n in os.getenv("BENCH_NS", "3,10,50,100").split(",")]

        os.makedirs(settings.output_dir, exist_ok=True)
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        csv_file = os.path.join(settings.output_dir, f"bench_{timestamp}.csv")
        json_file = os.path.join(settings.output_dir, f"bench_{timestamp}.json")

        program = parse_program(CHAIN_PROGRAM)
        query = parse_query(CHAIN_QUERY, program)
        report = BenchService(settings).bench(program, query, ENGINES, ns)

        write_report(report, csv_file, "csv")
        write_report(report, json_file, "json")

        logger.info(f"Bench dump completed. Files: {csv_file}, {json_file}")
        return 0
    except Exception as e:
        logger.error(f"Bench dump failed: {e}", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
