"""Runs a loaded Session task by task and writes its artifacts.

Artifacts are named <index>_<task or name>.{csv,json,txt} inside the output
directory. A failing task is logged and skipped; the exit status summarises
the run.
"""
import json
import logging
import traceback
from itertools import product
from pathlib import Path
from typing import Dict, List

from src.algebra.homology import check_prop5, clear_caches, image_stabilization
from src.harness.reports import TheoremReport, explain
from src.harness.theorem_harness import (
    DEFAULT_GRID,
    check_corollary7,
    check_corollary8,
    check_prop10,
    check_shifting,
    check_theorem6,
    check_theorem9,
    default_max_degree,
    remark_fixtures,
)
from src.models.schema import Conclusion
from src.sampling.hilbert_sampler import (
    as_range,
    diagonal_frame,
    sample_diagonal,
    sample_grid,
    sample_mixed,
    sample_power_grid,
)
from src.sampling.polynomial_fitter import fit_bivariate, fit_univariate
from src.session.session_loader import Session, TaskSpec

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_TASK_ERROR = 1
EXIT_PARSE_ERROR = 2
EXIT_REFUTED = 3


class SessionRunner:
    """Executes the tasks of a Session in order.

    Args:
        session: the loaded session.
        settings: merged application settings (see config/settings.yaml).
        output_dir: overrides the session and settings output directory.
        workers: thread count for cell evaluation; 0 or 1 runs sequentially.
    """

    def __init__(self, session: Session, settings=None, output_dir=None, workers=0):
        settings = settings or {}
        self.session = session
        self.output_dir = Path(output_dir or session.output or settings.get("output", {}).get("directory", "output"))
        self.workers = workers
        sampling = settings.get("sampling", {})
        fitting = settings.get("fitting", {})
        harness = settings.get("harness", {})
        lo, hi = sampling.get("grid", [1, 8])
        self.default_grid = ((lo, hi), (lo, hi))
        onset_lo, onset_hi = fitting.get("onsets", [1, 5])
        self.onset_range = tuple(range(onset_lo, onset_hi + 1))
        self.onsets = tuple(product(self.onset_range, repeat=2))
        self.default_max_degree = fitting.get("max_degree")
        self.budget = harness.get("budget", 8)
        self.window = harness.get("window", 4)
        self.tables = {}
        self.errors: List[str] = []
        self.refuted: List[str] = []
        self.written: List[Path] = []
        self._handlers = {
            "sample": self._run_table,
            "mixed": self._run_table,
            "power": self._run_table,
            "diagonal": self._run_diagonal,
            "fit": self._run_fit,
            "theorem6": self._run_theorem6,
            "corollary7": self._run_corollary7,
            "corollary8": self._run_corollary8,
            "theorem9": self._run_theorem9,
            "prop10": self._run_prop10,
            "prop5": self._run_prop5,
            "stabilization": self._run_stabilization,
            "shifting": self._run_shifting,
            "remark": self._run_remark,
        }

    def run(self) -> int:
        clear_caches()
        logger.info(f"Running {len(self.session.tasks)} tasks ---------------------")
        for task in self.session.tasks:
            try:
                logger.info(f"Task {task.index}: {task.task}" + (f" ({task.name})" if task.name else ""))
                self._handlers[task.task](task)
            except Exception as e:
                logger.error(f"Error in task {task.index} ({task.task}): {str(e)}")
                logger.error(traceback.format_exc())
                self.errors.append(task.stem)
        status = self.exit_status()
        logger.info(f"Session finished with status {status}, {len(self.written)} artifacts written")
        return status

    def exit_status(self) -> int:
        if self.errors:
            return EXIT_TASK_ERROR
        if self.refuted:
            return EXIT_REFUTED
        return EXIT_OK

    # artifacts

    def _path(self, task: TaskSpec, suffix):
        self.output_dir.mkdir(parents=True, exist_ok=True)
        path = self.output_dir / f"{task.stem}{suffix}"
        self.written.append(path)
        return path

    def _write_csv(self, task, frame, suffix=".csv"):
        path = self._path(task, suffix)
        frame.to_csv(path, index=False, lineterminator="\n")
        logger.info(f"Wrote {path}")

    def _write_json(self, task, payload: Dict, suffix=".json"):
        path = self._path(task, suffix)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        logger.info(f"Wrote {path}")

    def _write_text(self, task, text, suffix=".txt"):
        path = self._path(task, suffix)
        path.write_text(text)

    def _emit_report(self, task, report: TheoremReport):
        self._write_json(task, report.to_dict())
        self._write_text(task, explain(report))
        if report.table is not None:
            report.table.to_csv(self._path(task, ".csv"))
        self._track(task, report)

    def _track(self, task, report: TheoremReport):
        if report.conclusion is Conclusion.REFUTED or report.engine_disagreement:
            self.refuted.append(task.stem)
        logger.info(f"{task.stem}: {report.conclusion.value}")

    # parameters

    def _grid(self, task, default=None):
        return task.params.get("grid") or default or self.default_grid

    def _max_degree(self, task):
        value = task.params.get("max_degree")
        return value if value is not None else self.default_max_degree

    # tasks

    def _run_table(self, task):
        samplers = {"sample": sample_grid, "mixed": sample_mixed, "power": sample_power_grid}
        p = task.params
        table = samplers[task.task](p["i"], p["M"], p["N"], p["I"], p["J"], self._grid(task), workers=self.workers)
        self.tables[task.name or task.stem] = (table, task)
        table.to_csv(self._path(task, ".csv"))

    def _run_diagonal(self, task):
        p = task.params
        n_range = p.get("range") or self.default_grid[0]
        values = sample_diagonal(p["i"], p["M"], p["N"], p["I"], n_range, workers=self.workers)
        self._write_csv(task, diagonal_frame(as_range(n_range), values))

    def _table_for(self, task, default_kind="sample"):
        """Table named by 'table', or a fresh grid sample from the task parameters."""
        p = task.params
        if "table" in p:
            table, source = self.tables[p["table"]]
            return table, source.params
        if default_kind == "power":
            table = sample_power_grid(p["i"], p["M"], p["N"], p["I"], p["J"], self._grid(task), workers=self.workers)
        else:
            table = sample_grid(p["i"], p["M"], p["N"], p["I"], p["J"], self._grid(task), workers=self.workers)
        return table, p

    def _run_fit(self, task):
        table, source = self._table_for(task)
        max_degree = self._max_degree(task)
        if max_degree is None:
            max_degree = default_max_degree(source["I"], source["J"], source["M"], source["N"])
        fit = fit_bivariate(table, max_degree, self.onsets)
        self._write_json(task, fit.to_dict())
        self._write_text(task, explain(fit))

    def _run_theorem6(self, task):
        p = task.params
        report = check_theorem6(
            p["i"], p["I"], p["J"], p["M"], p["N"], self._grid(task),
            max_degree=self._max_degree(task), onsets=self.onsets, workers=self.workers,
        )
        self._emit_report(task, report)

    def _run_corollary7(self, task):
        p = task.params
        report = check_corollary7(
            p["i"], p["I"], p["M"], p["N"], p.get("range") or self.default_grid[0],
            max_degree=self._max_degree(task), onsets=self.onset_range, workers=self.workers,
        )
        self._emit_report(task, report)

    def _run_corollary8(self, task):
        p = task.params
        report = check_corollary8(
            p["i"], p["I"], p["J"], p["M"], p["N"], self._grid(task),
            max_degree=self._max_degree(task), onsets=self.onsets, workers=self.workers,
        )
        self._emit_report(task, report)

    def _run_theorem9(self, task):
        p = task.params
        report = check_theorem9(p["i"], p["I"], p["J"], p["M"], p["N"], self._grid(task, ((1, 6), (1, 6))))
        self._emit_report(task, report)
        if report.identity_residuals is not None:
            report.identity_residuals.to_csv(self._path(task, "_residuals.csv"))

    def _run_prop10(self, task):
        p = task.params
        form = p.get("form", "quotient")
        I, J, M, N = p["I"], p["J"], p["M"], p["N"]
        if form == "diagonal":
            n_range = p.get("range") or self.default_grid[0]
            values = sample_diagonal(p.get("i", 0), M, N, I, n_range, workers=self.workers)
            max_degree = self._max_degree(task)
            if max_degree is None:
                max_degree = default_max_degree(I, I, M, N, diagonal=True)
            fit = fit_univariate(values, max_degree, self.onset_range, start=as_range(n_range)[0])
        else:
            if "table" not in p and "i" not in p:
                raise ValueError("prop10 needs either 'table' or 'i'")
            table, _ = self._table_for(task, "power" if form == "power" else "sample")
            max_degree = self._max_degree(task)
            if max_degree is None:
                max_degree = default_max_degree(I, J, M, N)
            fit = fit_bivariate(table, max_degree, self.onsets)
        report = check_prop10(fit, I, J, M, N, form=form)
        report.budgets = {"max_degree": max_degree}
        self._emit_report(task, report)

    def _run_prop5(self, task):
        p = task.params
        result = check_prop5(p["i"], p["I"], p["M"], p["N"], budget=p.get("budget", self.budget))
        self._write_json(task, result.to_dict())
        self._write_text(task, explain(result))
        if not result.agree:
            self.refuted.append(task.stem)

    def _run_stabilization(self, task):
        p = task.params
        window = p.get("window", self.window)
        result = image_stabilization(p["i"], p["I"], p["M"], p["N"], p.get("budget", self.budget), window)
        self._write_json(task, {"i": p["i"], "k": result.k, "verified": result.verified, "window": result.window,
                                "checks": list(result.checks)})

    def _run_shifting(self, task):
        p = task.params
        report = check_shifting(p["i"], p["I"], p["J"], self._grid(task, ((1, 4), (1, 4))))
        self._emit_report(task, report)
        report.identity_residuals.to_csv(self._path(task, "_residuals.csv"))

    def _run_remark(self, task):
        reports = remark_fixtures(self.session.ring, self._grid(task, DEFAULT_GRID), self.onsets, self.workers)
        self._write_json(task, {"reports": [r.to_dict() for r in reports]})
        self._write_text(task, "\n".join(explain(r) for r in reports))
        for report in reports:
            self._track(task, report)


def run_session(session: Session, settings=None, output_dir=None, workers=0) -> int:
    return SessionRunner(session, settings, output_dir, workers).run()

