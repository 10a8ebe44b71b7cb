"""Exception types shared by all modules.

Every exception carries a short machine-readable ``code`` which the command
line driver copies into its JSON error document.
"""


class NFClassError(Exception):
    code = "error"


class InputError(NFClassError, ValueError):
    code = "input_error"


class NotIrreducible(InputError):
    code = "not_irreducible"


class MaximalityUnverified(NFClassError):
    code = "maximality_unverified"


class ZeroElement(NFClassError, ArithmeticError):
    code = "zero_element"


class NegativeValuation(NFClassError, ArithmeticError):
    code = "negative_valuation"


class XTooSmall(InputError):
    code = "x_too_small"


class IntervalTooWide(NFClassError):
    code = "interval_too_wide"


class RankDeficient(NFClassError):
    code = "rank_deficient"


class NotInSubgroup(NFClassError):
    code = "not_in_subgroup"


class NotFundamental(InputError):
    code = "not_fundamental"


class CapExceeded(NFClassError):
    code = "cap_exceeded"


class InconsistentPresentation(NFClassError):
    code = "inconsistent_presentation"


class Undecided(NFClassError):
    code = "undecided"


class BudgetExhausted(NFClassError):
    """Raised when a search runs out of budget.

    ``partial`` holds whatever the search had found so far.
    """

    code = "budget_exhausted"

    def __init__(self, message="budget exhausted", partial=None):
        super().__init__(message)
        self.partial = partial
