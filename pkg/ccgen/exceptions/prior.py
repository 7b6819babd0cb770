"""Prior sampling and training exception classes."""

from ccgen.exceptions.base import NumericError


class DegenerateDgp(NumericError):
    """A sampled DGP is unusable and must be resampled."""

    def __init__(self, detail: str = "Degenerate DGP"):
        super().__init__(detail=detail)


class NonFiniteGeneration(DegenerateDgp):
    """A node value became NaN or infinite."""

    def __init__(self, where: str = "forward pass"):
        super().__init__(detail=f"Non-finite value during {where}")


class DegenerateTreatment(DegenerateDgp):
    """Treatment has no spread."""

    def __init__(self, detail: str = "Treatment has zero spread"):
        super().__init__(detail=detail)


class DegenerateOutcome(DegenerateDgp):
    """CEPOs have no spread."""

    def __init__(self, detail: str = "Factual CEPOs have zero spread"):
        super().__init__(detail=detail)


class PriorExhausted(NumericError):
    """Retry budget spent without a usable DGP."""

    def __init__(self, attempts: int, last_reason: str = ""):
        detail = f"No usable DGP after {attempts} attempts"
        if last_reason:
            detail += f" (last: {last_reason})"
        super().__init__(detail=detail)
        self.attempts = attempts


class NonFiniteLoss(NumericError):
    """Training loss is NaN or infinite."""

    def __init__(self, detail: str = "Non-finite training loss"):
        super().__init__(detail=detail)
