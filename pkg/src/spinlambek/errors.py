"""Exception hierarchy shared by all modules."""


class SpinLambekError(Exception):
    pass


# syntax

class FormulaSyntaxError(SpinLambekError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownAtom(SpinLambekError):
    def __init__(self, name: str):
        super().__init__(f"unknown atom {name!r}")
        self.name = name


# deduction

class InvalidInference(SpinLambekError):
    def __init__(self, path: tuple, expected: str):
        where = "/".join(map(str, path)) or "root"
        super().__init__(f"invalid inference at {where}: expected {expected}")
        self.path = path
        self.expected = expected


class NonLinearVariable(SpinLambekError):
    def __init__(self, name: str):
        super().__init__(f"variable {name!r} occurs in more than one leaf")
        self.name = name


class EmptyAntecedent(SpinLambekError):
    pass


class DerivationFormatError(SpinLambekError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


# tensors and spin

class SlotMismatch(SpinLambekError):
    pass


class NotPSD(SpinLambekError):
    def __init__(self, min_eigenvalue: float):
        super().__init__(f"matrix is not PSD (min eigenvalue {min_eigenvalue:.3e})")
        self.min_eigenvalue = min_eigenvalue


class DegenerateMeasurement(SpinLambekError):
    def __init__(self, message: str = "normalizing trace vanishes", path: tuple = ()):
        super().__init__(message)
        self.path = path


class LadderOverflow(SpinLambekError):
    def __init__(self, message: str = "raising annihilated the state", path: tuple = ()):
        super().__init__(message)
        self.path = path


class InvalidSpinConfig(SpinLambekError):
    pass


# semantics

class SignatureMismatch(SpinLambekError):
    def __init__(self, message: str, path: tuple = ()):
        super().__init__(message)
        self.path = path


class UnboundVariable(SpinLambekError):
    pass


class NotEvaluable(SpinLambekError):
    pass


class LengthMismatch(SpinLambekError):
    pass


# lexicon and pipeline

class ParseError(SpinLambekError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ShapeError(SpinLambekError):
    def __init__(self, word: str, expected: str):
        super().__init__(f"{word}: matrix shape does not match {expected}")
        self.word = word
        self.expected = expected


class DensityViolation(SpinLambekError):
    def __init__(self, word: str, report):
        super().__init__(f"{word}: not a density matrix ({report})")
        self.word = word
        self.report = report


class UnknownWord(SpinLambekError):
    def __init__(self, word: str):
        super().__init__(f"word {word!r} is not in the lexicon")
        self.word = word


class ReadingError(SpinLambekError):
    def __init__(self, reading: int, cause: Exception):
        super().__init__(f"reading {reading}: {cause}")
        self.reading = reading
        self.cause = cause
