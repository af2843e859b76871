class HyltlError(Exception):
    """Base class for all errors raised by the toolchain."""


class ParseError(HyltlError, ValueError):
    def __init__(self, message, pos=None, text=None):
        self.pos = pos
        self.text = text
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)


class DeclarationError(HyltlError, ValueError):
    """An undeclared variable or action, or use of a reserved name."""


class FormulaError(HyltlError, ValueError):
    """A formula is not in the form an operation requires (NNF, positive, ...)."""


class AutomatonError(HyltlError, ValueError):
    pass


class UnsupportedError(HyltlError, ValueError):
    pass


class TraceError(HyltlError, ValueError):
    pass
