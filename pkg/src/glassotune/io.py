"""File ingestion and the text formats written by the command-line tools.

Machine-readable files carry 17 significant digits so matrices round-trip
exactly; human-readable tables use 4. The raw replication dump is a CSV with
a fixed column order; the summary table is one row per study cell.
"""

import numpy as np

from .errors import DataParseError, TooFewRowsError
from .simulate import MEASURES

MACHINE_FMT = "%.17g"

DUMP_FIELDS = (
    "rep_index", "scenario", "n", "penalty", "selector", "chosen_lambda",
    "frobenius", "frobenius_squared", "entropy", "fp", "fn", "converged_flag",
)


def _parse_line(line, lineno, delim):
    tokens = line.split(",") if delim == "," else line.split()
    try:
        return [float(t) for t in tokens]
    except ValueError as exc:
        raise DataParseError(
            f"line {lineno}: could not parse {line!r} as numbers", line=lineno
        ) from exc


def ingest(path, center: bool = False) -> np.ndarray:
    """Parse a delimited numeric table into an (n, p) data array.

    The delimiter (comma or whitespace) is auto-detected from the first
    content line; a non-numeric first line is treated as a header and
    skipped. Rows are observations, columns are variables. With `center`
    set, column means are subtracted.

    Raises
    ------
    DataParseError
        Non-numeric content or ragged rows, with the line number.
    TooFewRowsError
        Fewer than 3 data rows.
    """
    with open(path) as fh:
        lines = [(i + 1, ln.strip()) for i, ln in enumerate(fh)]
    lines = [(no, ln) for no, ln in lines if ln]
    if not lines:
        raise TooFewRowsError(f"{path}: file is empty")

    first_no, first = lines[0]
    delim = "," if "," in first else None
    tokens = first.split(",") if delim == "," else first.split()
    try:
        [float(t) for t in tokens]
    except ValueError:
        lines = lines[1:]  # header row
        if not lines:
            raise TooFewRowsError(f"{path}: no data rows after header")
        delim = "," if "," in lines[0][1] else None

    rows = []
    width = None
    for no, ln in lines:
        row = _parse_line(ln, no, delim)
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise DataParseError(
                f"line {no}: expected {width} columns, got {len(row)}", line=no
            )
        rows.append(row)
    if len(rows) < 3:
        raise TooFewRowsError(f"{path}: need at least 3 rows, got {len(rows)}")
    data = np.array(rows, dtype=float)
    if center:
        data = data - data.mean(axis=0)
    return data


def write_matrix(path, a) -> None:
    """Write a matrix as whitespace-delimited text at full precision."""
    np.savetxt(path, np.asarray(a, dtype=float), fmt=MACHINE_FMT)


def read_matrix(path) -> np.ndarray:
    """Read a matrix written by :func:`write_matrix` (square required)."""
    a = np.atleast_2d(np.loadtxt(path))
    if a.shape[0] != a.shape[1]:
        raise DataParseError(f"{path}: expected a square matrix, got {a.shape}")
    return a


def write_edges(path, est) -> None:
    """Write the support edge list as ``i j omega_ij`` lines, 1-based, i < j."""
    with open(path, "w") as fh:
        for i, j in sorted(est.support):
            if i < j:
                fh.write(f"{i + 1} {j + 1} {MACHINE_FMT % est.precision[i, j]}\n")


def write_scores(path, grid, scores, selector: str) -> None:
    """Write the per-lambda score table for one selector."""
    with open(path, "w") as fh:
        fh.write(f"lambda {selector}\n")
        for lam, sc in zip(grid, scores):
            fh.write(f"{MACHINE_FMT % lam} {MACHINE_FMT % sc}\n")


def write_chosen_lambda(path, lam: float) -> None:
    with open(path, "w") as fh:
        fh.write(f"{MACHINE_FMT % lam}\n")


def write_dot(path, omega) -> None:
    """Write an undirected DOT graph: one node per variable, one edge per
    nonzero upper off-diagonal entry, with the precision value as weight."""
    omega = np.asarray(omega, dtype=float)
    p = omega.shape[0]
    with open(path, "w") as fh:
        fh.write("graph precision {\n")
        for i in range(p):
            fh.write(f"  v{i + 1};\n")
        for i in range(p):
            for j in range(i + 1, p):
                if omega[i, j] != 0.0:
                    fh.write(f'  v{i + 1} -- v{j + 1} [weight="{omega[i, j]:.6g}"];\n')
        fh.write("}\n")


def write_raw_dump(path, results) -> None:
    """Write one CSV record per replication result, fixed field order."""
    with open(path, "w") as fh:
        fh.write(",".join(DUMP_FIELDS) + "\n")
        for r in results:
            fh.write(
                f"{r.rep_index},{r.scenario},{r.n},{r.penalty},{r.selector},"
                f"{MACHINE_FMT % r.chosen_lambda},{MACHINE_FMT % r.frobenius},"
                f"{MACHINE_FMT % r.frobenius_squared},{MACHINE_FMT % r.entropy},"
                f"{r.fp},{r.fn},{int(r.converged)}\n"
            )


def write_summary(path, summary) -> None:
    """Write the per-cell summary table: one row per cell, mean/sd columns."""
    cols = ["scenario", "n", "penalty", "selector", "count"]
    for m in MEASURES:
        cols += [f"{m}_mean", f"{m}_sd"]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for key in sorted(summary.cells):
            scenario, n, penalty, selector = key
            cell = summary.cells[key]
            vals = []
            for m in MEASURES:
                vals += [MACHINE_FMT % cell.means[m], MACHINE_FMT % cell.sds[m]]
            fh.write(
                f"{scenario},{n},{penalty},{selector},{cell.count},"
                + ",".join(vals) + "\n"
            )


def format_summary_table(summary) -> str:
    """Human-readable summary: scenario/n blocks, selector columns,
    ``mean (sd)`` entries at 4 significant digits."""
    keys = sorted(summary.cells)
    blocks = sorted({(k[0], k[1], k[2]) for k in keys})
    out = []
    for scenario, n, penalty in blocks:
        selectors = [k[3] for k in keys if k[:3] == (scenario, n, penalty)]
        out.append(f"=== {scenario}  n={n}  penalty={penalty} ===")
        out.append(f"{'measure':<20}" + "".join(f"{s:>22}" for s in selectors))
        for m in MEASURES:
            row = f"{m:<20}"
            for s in selectors:
                cell = summary.cells[(scenario, n, penalty, s)]
                row += f"{cell.means[m]:.4g} ({cell.sds[m]:.4g})".rjust(22)
            out.append(row)
        counts = {summary.cells[(scenario, n, penalty, s)].count for s in selectors}
        out.append(f"{'replications':<20}" + str(sorted(counts)).rjust(22))
        out.append("")
    return "\n".join(out)
