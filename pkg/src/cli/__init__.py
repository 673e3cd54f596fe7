"""Command-line surface: run / verify / simulate"""

from .commands import main, cmd_run, cmd_verify, cmd_simulate

__all__ = ['main', 'cmd_run', 'cmd_verify', 'cmd_simulate']
