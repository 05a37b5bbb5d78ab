"""Exception types shared across the workbench."""


class MtwError(Exception):
    """Base class for all workbench errors."""


# --- syntax ---

class FormulaSyntaxError(MtwError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownSymbol(MtwError):
    def __init__(self, name: str):
        super().__init__(f"unknown symbol: {name}")
        self.name = name


class SortMismatch(MtwError):
    def __init__(self, what, expected, actual):
        super().__init__(f"sort mismatch in {what}: expected {expected}, got {actual}")
        self.what = what
        self.expected = expected
        self.actual = actual


class ProfileMismatch(MtwError):
    pass


class NonInjective(MtwError):
    pass


# --- structures ---

class NotSubvocabulary(MtwError):
    pass


class NameClash(MtwError):
    pass


class OutOfDomain(MtwError):
    pass


class NotClosed(MtwError):
    def __init__(self, function: str, args: tuple):
        super().__init__(f"subset not closed under {function} at {args}")
        self.function = function
        self.args = args


class EmptyRelativization(MtwError):
    pass


class NonRelational(MtwError):
    pass


class VocabularyMismatch(MtwError):
    pass


# --- semantics ---

class UnboundVariable(MtwError):
    def __init__(self, name: str):
        super().__init__(f"unbound variable: {name}")
        self.name = name


class SymbolicQuantifierOnFiniteStructure(MtwError):
    pass


class BoundTooLargeForBudget(MtwError):
    pass


class BudgetExceeded(MtwError):
    pass


class MultiFreeVariableGuard(MtwError):
    pass


# --- tableau ---

class UnsupportedConnective(MtwError):
    pass


class HintikkaViolation(MtwError):
    def __init__(self, violations):
        super().__init__(f"hintikka conditions violated: {violations}")
        self.violations = violations


# --- interpolation ---

class IncompleteSigma0(MtwError):
    def __init__(self, symbol: str):
        super().__init__(f"base theory does not decide symbol: {symbol}")
        self.symbol = symbol


class VocabularyOverlapViolation(MtwError):
    pass


class PremiseUnsatisfiable(MtwError):
    pass


class VisibleVocabularyMismatch(MtwError):
    pass


class SymbolNotPresent(MtwError):
    pass
