"""
Planar Forest Ends
Ends of stationary planar random forests: exact geometry, finite-window
classification, model generators and the corridor ordering of doors.
"""

__version__ = "1.0.0"
