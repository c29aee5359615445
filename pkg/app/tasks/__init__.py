"""Worker-process entry points."""

from app.tasks.backtest_tasks import run_coverage_chunk, run_replicate_chunk

__all__ = ['run_replicate_chunk', 'run_coverage_chunk']
