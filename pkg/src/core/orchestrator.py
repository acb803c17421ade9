"""Main orchestrator that runs the verification suites over seeded cases."""

import json
import sys
import time
import logging
from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple
from concurrent.futures import ThreadPoolExecutor, as_completed

from tqdm import tqdm

from src.core.ensembles import derive_rng
from src.core.suites import DESCRIPTIONS, SuiteContext, run_suite, suite_names
from src.models.reports import ItoReport, RunReport
from src.utils.config import HarnessConfig, config
from src.utils.errors import PreconditionError
from src.utils.logging_config import new_run_id, run_log

logger = logging.getLogger(__name__)

class VerificationOrchestrator:
    """Runs every (suite, seed) case of a harness config and assembles the report."""

    def __init__(self, max_workers: Optional[int] = None):
        self.max_workers = max(1, max_workers or config.max_workers)
        self.stats = {
            'runs': 0,
            'records': 0,
            'failures': 0,
            'skipped': 0,
            'errors': 0,
            'last_run': None,
            'last_run_log': None
        }

    def build_context(self, harness: HarnessConfig) -> SuiteContext:
        try:
            space = harness.build_space()
        except PreconditionError as e:
            logger.error(f"Invalid point space: {e}")
            raise
        return SuiteContext(space, harness.q_spec(), harness.density, harness.magnitude,
                            harness.degree, dict(harness.tolerances), config.default_tolerance)

    def run_case(self, suite: str, index: int, ctx: SuiteContext, seed_base: int) -> ItoReport:
        """One suite on one seed; unexpected errors become failed records."""
        rng = derive_rng(seed_base, suite, index)
        try:
            return run_suite(suite, ctx, index, rng)
        except Exception as e:
            logger.error(f"Error in suite {suite} for seed {index}: {e}")
            self.stats['errors'] += 1
            return ItoReport.failure(suite, index, ctx.tolerance(suite), f"{type(e).__name__}: {e}",
                                     ctx.parameters())

    def run(self, harness: HarnessConfig, progress: Optional[bool] = None) -> RunReport:
        """Run every selected suite on every seed; records come back in (suite, seed) order.

        Everything logged during the run is also written to logs/run_<id>.log.
        """
        run_id = new_run_id(harness.seed_base)
        with run_log(run_id) as path:
            self.stats['last_run_log'] = str(path)
            logger.info(f"Run {run_id}: {json.dumps(harness.to_dict(), sort_keys=True, default=str)}")
            return self._run_cases(harness, progress)

    def _run_cases(self, harness: HarnessConfig, progress: Optional[bool]) -> RunReport:
        suites = suite_names(harness.suites)
        ctx = self.build_context(harness)
        cases: List[Tuple[str, int]] = [(suite, index) for suite in suites
                                         for index in range(harness.seed_count)]
        logger.info(f"Starting run: {len(suites)} suites x {harness.seed_count} seeds "
                    f"on n={ctx.space.n} with {self.max_workers} workers")

        if progress is None:
            progress = sys.stderr.isatty()
        start_time = time.time()
        results: Dict[Tuple[str, int], ItoReport] = {}

        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            # Submit all cases
            future_to_case = {
                executor.submit(self.run_case, suite, index, ctx, harness.seed_base): (suite, index)
                for suite, index in cases
            }

            # Collect in completion order, assemble in case order
            with tqdm(total=len(cases), desc="Verifying", unit="case", disable=not progress) as bar:
                for future in as_completed(future_to_case):
                    suite, index = future_to_case[future]
                    try:
                        results[(suite, index)] = future.result()
                    except Exception as e:
                        logger.error(f"Unexpected error in suite {suite} for seed {index}: {e}")
                        results[(suite, index)] = ItoReport.failure(suite, index, ctx.tolerance(suite), str(e))
                    bar.update(1)

        records = [results[case] for case in cases]
        report = RunReport(harness.to_dict(), records, time.time() - start_time)
        self._update_stats(report)

        for suite, suite_records in report.by_suite().items():
            failed = sum(1 for r in suite_records if not r.passed)
            if failed:
                logger.error(f"Suite {suite}: {failed}/{len(suite_records)} records failed")
            else:
                logger.info(f"Suite {suite}: {len(suite_records)} records passed")
        logger.info(f"Run completed in {report.total_runtime_seconds:.1f} seconds - "
                    f"{'PASS' if report.passed else 'FAIL'}")
        return report

    def _update_stats(self, report: RunReport):
        self.stats['runs'] += 1
        self.stats['records'] += len(report.records)
        self.stats['failures'] += len(report.failed_records)
        self.stats['skipped'] += sum(1 for r in report.records if r.skipped)
        self.stats['last_run'] = datetime.utcnow()

    def get_status(self) -> Dict[str, Any]:
        return {
            'max_workers': self.max_workers,
            'suites': dict(DESCRIPTIONS),
            'processing_stats': {**self.stats,
                                 'last_run': self.stats['last_run'].isoformat() if self.stats['last_run'] else None},
        }

# Global orchestrator instance
orchestrator = VerificationOrchestrator()
