# errors.py: error hierarchy shared by every module
#
# Each class carries a stable `code`; the sweep writes it into the CSV
# error_code column and the CLI maps it to an exit status.


class KernelGramError(Exception):
    code = "error"


class InputError(KernelGramError):
    code = "input"


class ConfigError(KernelGramError):
    code = "config"


class InvariantViolation(KernelGramError):
    code = "invariant"


# ─── Numerical failures (recorded as error rows inside a sweep) ───────────────

class NumericalError(KernelGramError):
    code = "numerical"


class SingularityError(NumericalError):
    code = "singular"

    def __init__(self, block: str, condition: float, threshold: float):
        self.block = block
        self.condition = condition
        self.threshold = threshold
        super().__init__(
            f"{block} is numerically singular: condition {condition:.3e} exceeds {threshold:.3e}"
        )


class DebiasUndefinedError(NumericalError):
    """1 − λ₁ (or 1 − τ₁) too close to zero: the kernel looks like the identity."""
    code = "debias_undefined"


class DomainError(NumericalError):
    code = "domain"


class DiagnosticsError(NumericalError):
    code = "diagnostics"
