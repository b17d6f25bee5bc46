"""Chiplet inter-chiplet-interconnect topology toolkit."""

from ._core import *  # noqa: F401,F403
