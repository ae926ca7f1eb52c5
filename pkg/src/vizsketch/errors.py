"""Exception hierarchy shared by all modules."""


class VizSketchError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(VizSketchError):
    """An operation was called with arguments that violate its contract."""


class SchemaError(VizSketchError):
    """Column names or arities do not line up."""


class ParseError(VizSketchError):
    """Malformed input text (CSV, JSON tables, sketches, task files)."""


class EvalError(VizSketchError):
    """A table program statement failed at evaluation time."""


class RenderError(VizSketchError):
    """A visual program could not be rendered over its input table(s)."""
