"""Figure scripts for spintop sweep outputs.

Read-only over CSV/JSON files produced by the computation CLI; each script
validates the input schema exactly, renders one figure family, and stamps
the run-metadata hash into the output.
"""

__version__ = "0.1.0"
