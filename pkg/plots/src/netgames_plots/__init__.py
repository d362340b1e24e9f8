from .render import EmptyDataError, PlotJob, SchemaError, render

__version__ = "0.1.0"
