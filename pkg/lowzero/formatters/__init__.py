"""
Formatter modules for lowzero.

``text`` renders reports for the terminal; ``records`` produces the
machine-readable CSV and JSON outputs.
"""
