"""Exception hierarchy shared across the package."""


class LayoutRetError(Exception):
    """Base class for all errors raised by layoutret."""


# --- container -------------------------------------------------------------

class PackageError(LayoutRetError):
    """The file cannot be processed as an OPC package."""


class NotZip(PackageError):
    pass


class CorruptArchive(PackageError):
    pass


class MissingContentTypes(PackageError):
    pass


class MalformedRelationshipXml(PackageError):
    pass


# --- extractor -------------------------------------------------------------

class UnsupportedType(LayoutRetError):
    pass


class ParseFailure(LayoutRetError):
    pass


# --- store -----------------------------------------------------------------

class StoreError(LayoutRetError):
    pass


class SchemaMismatch(StoreError):
    pass


class MalformedRecord(StoreError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class IoFailure(StoreError, OSError):
    pass


# --- query -----------------------------------------------------------------

class QueryError(LayoutRetError, ValueError):
    """Any problem with a user-supplied retrieval query."""


class QuerySyntaxError(QueryError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


class UnknownField(QueryError):
    pass


class UnitError(QueryError):
    pass


class EmptyQuery(QueryError):
    pass


class OutOfBounds(QueryError):
    pass


class RegistryNotFound(LayoutRetError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "registry row not found"


# --- matcher / eval --------------------------------------------------------

class TypeMismatch(LayoutRetError, TypeError):
    pass


class EvalError(LayoutRetError):
    pass


class UnknownGroup(EvalError):
    pass


class GroundTruthError(EvalError):
    pass
