"""
Imports all `export` functions (CSV writers)
"""

from .save import save_summary, save_report, save_traces, trace_rows, SUMMARY_COLUMNS
