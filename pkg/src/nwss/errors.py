"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A scenario or sweep parameterization violates its invariants."""


class BudgetExceededError(RuntimeError):
    """The closed-form enumeration would exceed the allowed term count."""

    def __init__(self, k, count, budget):
        self.k = k
        self.count = count
        self.budget = budget
        super().__init__(
            f"combinatorial explosion at k={k}: {count} minor pairs exceeds budget {budget}"
        )
