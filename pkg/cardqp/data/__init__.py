"""
Dataset readers and writers, synthetic datasets, and report serialization.
"""
from .port import (
        AssetUniverse, PortDataset, PortFormatError, MalformedLine, IndexOutOfRange,
        DuplicateEntry, CountMismatch, EmptyCurve, NotPsd, parse_port, parse_uef, covariance,
        load_dataset)
from .report import (
        ReportDocument, ReportFormat, format_float, write_report, read_report, save_report)
from .synthetic import (
        random_correlation, random_universe, unconstrained_frontier, format_port, format_uef)
