"""Exception types shared across the package."""


class EnumerationOverflow(RuntimeError):
    """Divisor-chain enumeration would exceed the configured cap.

    Carries the exact chain count so callers can re-plan.
    """

    def __init__(self, chain_count: int, cap: int):
        super().__init__(f"chain enumeration needs {chain_count} tuples, cap is {cap}")
        self.chain_count = chain_count
        self.cap = cap


class BudgetExceeded(RuntimeError):
    """A presence-set computation would exceed the configured bit budget."""

    def __init__(self, required_bits: int, budget_bits: int):
        required_bytes = -(-required_bits // 8)
        super().__init__(
            f"needs {required_bits} bits ({required_bytes} bytes), budget is {budget_bits} bits"
        )
        self.required_bits = required_bits
        self.required_bytes = required_bytes
        self.budget_bits = budget_bits


class UnsupportedDimension(ValueError):
    """Requested dimension is above the supported cap."""
