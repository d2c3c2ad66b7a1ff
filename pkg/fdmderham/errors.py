class FdmDerhamError(Exception):
    '''
    Base class of all errors raised by fdmderham
    '''


class InvalidArgument(FdmDerhamError, ValueError):
    pass


class ConfigError(InvalidArgument):
    pass


class NumericalFailure(FdmDerhamError, ArithmeticError):

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics

    def __str__(self):
        msg = super().__str__()
        if self.diagnostics:
            details = ', '.join(f'{k}={v}' for k, v in self.diagnostics.items())
            msg += f' ({details})'
        return msg


class ParseError(FdmDerhamError, ValueError):

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f'line {lineno}: {message}'
        super().__init__(message)
        self.lineno = lineno


class InvalidData(FdmDerhamError, ValueError):
    pass


class InvalidStructure(FdmDerhamError, ValueError):
    pass
