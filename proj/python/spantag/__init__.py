"""Propaganda span identification and technique classification toolkit."""

from spantag._core import *  # noqa: F401,F403
from spantag._core import __version__  # noqa: F401
