from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from src.core.logging import ContextLogger
from src.models import OutputImage


@dataclass
class IntegrityCheckResult:
    passed: bool
    mismatches: List[str]
    details: Dict[str, Any]


class CoverageChecker:
    """Post-render checks on alpha coverage and output reproducibility"""

    def __init__(self, logger: Optional[ContextLogger] = None):
        self.logger = logger or ContextLogger(__name__)

    def verify_coverage(self, output: OutputImage, expect_full: bool) -> IntegrityCheckResult:
        alpha = output.alpha
        covered = int(np.count_nonzero(alpha == 255))
        empty = int(np.count_nonzero(alpha == 0))
        details = {
            "total_pixels": int(alpha.size),
            "covered": covered,
            "empty": empty,
        }
        mismatches = []

        partial = alpha.size - covered - empty
        if partial:
            mismatches.append(f"{partial} pixels have partial alpha")
        if expect_full and empty:
            mismatches.append(f"{empty} pixels received no source sample")

        result = IntegrityCheckResult(
            passed=len(mismatches) == 0,
            mismatches=mismatches,
            details=details
        )
        if not result.passed:
            self.logger.warning("Coverage check failed", mismatches=mismatches, **details)
        return result

