"""Integrated synchronization and communication at the MAC layer.

A simulation toolkit for carrying time-sync exchanges inside MAC PDUs
(control elements or SDUs), scheduling them alongside user traffic, and
comparing the result with a separated PTP-style baseline.
"""

__version__ = "0.1.0"
