from __future__ import annotations


class AdderCapError(Exception):
    code = "addercap_error"

    def to_payload(self) -> dict[str, str]:
        return {"code": self.code, "message": str(self)}


class DomainError(AdderCapError, ValueError):
    code = "domain_error"


class SolverError(AdderCapError, RuntimeError):
    code = "solver_failure"


class CertificationError(AdderCapError, RuntimeError):
    code = "certification_failed"


class OptimizationError(AdderCapError, RuntimeError):
    code = "optimization_failed"


class MalformedCodeError(AdderCapError, ValueError):
    code = "malformed_code"


class ResourceLimitError(AdderCapError, RuntimeError):
    code = "resource_limit"
