"""Ingestion of real-world entity x year indicator panels.

Loads long- or wide-format CSVs into a :class:`RawPanel`, fills missing cells
by a donor-weighted average across entities (weights inversely proportional
to the distance between entity profiles), averages indicators into their
targets, and slices complete panels into :class:`SamplePanel` pairs for the
two-sample and independence tests.

Missing cells are NaN internally and empty fields on disk; observed values
are never modified by imputation.
"""

from __future__ import annotations

import configparser
import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, SampleSizeError
from .panels import SamplePanel

SCHEMA_FORMAT_VERSION = "paneltest-schema/1"
MANIFEST_FORMAT_VERSION = "paneltest-manifest/1"


@dataclass(frozen=True)
class PanelSchema:
    """Column mapping and metadata for :func:`load_csv`.

    ``layout`` is ``long`` (entity, year, indicator, value columns) or
    ``wide`` (entity and year columns; every other column is one indicator).
    ``indicator_targets`` maps indicators onto aggregation targets and
    ``entity_groups`` labels entities (e.g. income class); both may be empty
    when the corresponding operations are not used.
    """

    layout: str = "long"
    entity_col: str = "entity"
    year_col: str = "year"
    indicator_col: str = "indicator"
    value_col: str = "value"
    indicator_targets: dict = field(default_factory=dict)
    entity_groups: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.layout not in ("long", "wide"):
            raise InputError(f"schema layout must be 'long' or 'wide', got {self.layout!r}")

    @classmethod
    def from_file(cls, path) -> "PanelSchema":
        """Read a schema from an INI file with [columns], [targets], [groups]."""
        parser = configparser.ConfigParser()
        parser.optionxform = str  # keep key case
        read = parser.read(path)
        if not read:
            raise InputError(f"schema file not found or unreadable: {path}")
        columns = parser["columns"] if parser.has_section("columns") else {}
        return cls(
            layout=columns.get("layout", "long"),
            entity_col=columns.get("entity", "entity"),
            year_col=columns.get("year", "year"),
            indicator_col=columns.get("indicator", "indicator"),
            value_col=columns.get("value", "value"),
            indicator_targets=dict(parser["targets"]) if parser.has_section("targets") else {},
            entity_groups=dict(parser["groups"]) if parser.has_section("groups") else {},
        )


@dataclass
class RawPanel:
    """Named indicator matrices over shared entities and a shared year grid.

    Every indicator matrix has shape (n_entities, n_years); missing cells are
    NaN. ``indicator_targets`` and ``entity_groups`` carry the aggregation
    and grouping metadata.
    """

    entities: list
    grid: np.ndarray
    indicators: dict
    indicator_targets: dict = field(default_factory=dict)
    entity_groups: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.grid = np.asarray(self.grid, dtype=np.float64)
        if self.grid.ndim != 1 or (self.grid.size > 1 and not np.all(np.diff(self.grid) > 0)):
            raise InputError("year grid must be 1-D and strictly increasing")
        shape = (len(self.entities), self.grid.size)
        for name, matrix in self.indicators.items():
            matrix = np.asarray(matrix, dtype=np.float64)
            if matrix.shape != shape:
                raise InputError(
                    f"indicator {name!r} has shape {matrix.shape}, expected {shape}"
                )
            self.indicators[name] = matrix

    @property
    def n_missing(self) -> int:
        return int(sum(np.isnan(m).sum() for m in self.indicators.values()))

    def copy(self) -> "RawPanel":
        return RawPanel(
            entities=list(self.entities),
            grid=self.grid.copy(),
            indicators={k: v.copy() for k, v in self.indicators.items()},
            indicator_targets=dict(self.indicator_targets),
            entity_groups=dict(self.entity_groups),
        )


def _parse_value(raw: str, line_no: int, path) -> float:
    text = raw.strip()
    if text == "":
        return np.nan
    try:
        return float(text)
    except ValueError as exc:
        raise InputError(f"{path}:{line_no}: non-numeric value {raw!r}") from exc


def load_csv(path, schema: PanelSchema) -> RawPanel:
    """Parse a CSV into a RawPanel; empty value fields become missing cells.

    Duplicate (entity, year, indicator) observations and malformed rows are
    reported with their line numbers. Entities and indicators keep file
    order; years are sorted ascending.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        rows = [(reader.line_num, row) for row in reader if row]

    def column(name: str) -> int:
        try:
            return header.index(name)
        except ValueError:
            raise InputError(f"{path}: missing column {name!r} (header: {header})") from None

    cells: dict = {}
    e_col, y_col = column(schema.entity_col), column(schema.year_col)
    if schema.layout == "long":
        i_col, v_col = column(schema.indicator_col), column(schema.value_col)
        indicator_cols = None
    else:
        reserved = {e_col, y_col}
        indicator_cols = [(name, i) for i, name in enumerate(header) if i not in reserved]
        if not indicator_cols:
            raise InputError(f"{path}: wide layout needs at least one indicator column")

    for line_no, row in rows:
        if len(row) != len(header):
            raise InputError(
                f"{path}:{line_no}: expected {len(header)} fields, got {len(row)}"
            )
        entity = row[e_col].strip()
        try:
            year = float(row[y_col])
        except ValueError:
            raise InputError(f"{path}:{line_no}: non-numeric year {row[y_col]!r}") from None
        if schema.layout == "long":
            items = [(row[i_col].strip(), row[v_col])]
        else:
            items = [(name, row[i]) for name, i in indicator_cols]
        for indicator, raw in items:
            key = (entity, year, indicator)
            value = _parse_value(raw, line_no, path)
            if key in cells and not (np.isnan(cells[key]) and np.isnan(value)):
                raise InputError(
                    f"{path}:{line_no}: duplicate observation for "
                    f"entity={entity!r}, year={year:g}, indicator={indicator!r}"
                )
            cells[key] = value

    entities: list = []
    indicators: list = []
    years: set = set()
    for entity, year, indicator in cells:
        if entity not in entities:
            entities.append(entity)
        if indicator not in indicators:
            indicators.append(indicator)
        years.add(year)
    grid = np.array(sorted(years))
    year_pos = {y: j for j, y in enumerate(grid)}
    entity_pos = {e: i for i, e in enumerate(entities)}
    matrices = {
        ind: np.full((len(entities), grid.size), np.nan) for ind in indicators
    }
    for (entity, year, indicator), value in cells.items():
        matrices[indicator][entity_pos[entity], year_pos[year]] = value
    return RawPanel(
        entities=entities,
        grid=grid,
        indicators=matrices,
        indicator_targets=dict(schema.indicator_targets),
        entity_groups=dict(schema.entity_groups),
    )


def _entity_profiles(panel: RawPanel) -> np.ndarray:
    """Entities x coordinates matrix of z-scored observed values (NaN = missing)."""
    profile = np.hstack([panel.indicators[name] for name in panel.indicators])
    mean = np.nanmean(np.where(np.isnan(profile), np.nan, profile), axis=0)
    with np.errstate(invalid="ignore"):
        std = np.nanstd(profile, axis=0)
    std = np.where((std == 0) | np.isnan(std), 1.0, std)
    return (profile - mean) / std


def entity_distances(panel: RawPanel) -> np.ndarray:
    """Pairwise entity distances over mutually observed, z-scored coordinates.

    Pairs with no coordinate observed in both entities get an infinite
    distance (unusable as donors). Distances use the pre-imputation data only.
    """
    profiles = _entity_profiles(panel)
    observed = ~np.isnan(profiles)
    filled = np.where(observed, profiles, 0.0)
    mask = observed.astype(np.float64)
    sq = (filled**2) @ mask.T
    sq = sq + sq.T - 2.0 * (filled @ filled.T)
    np.maximum(sq, 0.0, out=sq)
    shared = mask @ mask.T
    dist = np.sqrt(sq)
    dist[shared == 0] = np.inf
    np.fill_diagonal(dist, np.inf)  # an entity never donates to itself
    return dist


def impute_with_report(panel: RawPanel) -> tuple[RawPanel, list]:
    """Fill every missing cell from donor entities; list what was filled.

    Each report entry is a dict with the cell coordinates, the fill value,
    and the number of donors used. Donors must be observed at the same
    (indicator, year); weights are 1/distance, and a zero-distance donor
    short-circuits to a direct copy (average over all zero-distance donors).
    """
    dist = entity_distances(panel)
    filled = panel.copy()
    report: list = []
    for name, matrix in panel.indicators.items():
        target = filled.indicators[name]
        missing_entities, missing_years = np.nonzero(np.isnan(matrix))
        for e, j in zip(missing_entities, missing_years):
            observed = ~np.isnan(matrix[:, j])
            usable = observed & np.isfinite(dist[e])
            donors = np.nonzero(usable)[0]
            if donors.size == 0:
                raise InputError(
                    f"cell (entity={panel.entities[e]!r}, year={panel.grid[j]:g}, "
                    f"indicator={name!r}) has no usable donor"
                )
            d = dist[e, donors]
            if np.any(d == 0.0):
                exact = donors[d == 0.0]
                value = float(matrix[exact, j].mean())
            else:
                weights = 1.0 / d
                value = float(np.average(matrix[donors, j], weights=weights))
            target[e, j] = value
            report.append(
                {
                    "entity": panel.entities[e],
                    "year": float(panel.grid[j]),
                    "indicator": name,
                    "value": value,
                    "donors": int(donors.size),
                }
            )
    return filled, report


def impute(panel: RawPanel) -> RawPanel:
    """Return a complete copy of the panel; observed cells are untouched."""
    return impute_with_report(panel)[0]


def aggregate_to_targets(panel: RawPanel) -> RawPanel:
    """Average the indicators belonging to each target, per (entity, year).

    Cells missing in some member indicators average over the observed ones;
    cells missing everywhere stay missing. The result maps each target to
    itself so downstream operations keep working.
    """
    unmapped = [i for i in panel.indicators if i not in panel.indicator_targets]
    if unmapped:
        raise InputError(f"indicators without a target mapping: {unmapped}")
    by_target: dict = {}
    for name in panel.indicators:  # preserve indicator order within targets
        by_target.setdefault(panel.indicator_targets[name], []).append(name)
    aggregated = {}
    with np.errstate(invalid="ignore"):
        for target, members in by_target.items():
            stack = np.stack([panel.indicators[name] for name in members])
            aggregated[target] = np.nanmean(stack, axis=0)
    return RawPanel(
        entities=list(panel.entities),
        grid=panel.grid.copy(),
        indicators=aggregated,
        indicator_targets={t: t for t in aggregated},
        entity_groups=dict(panel.entity_groups),
    )


def _complete_rows(panel: RawPanel, indicator: str, rows: np.ndarray) -> np.ndarray:
    matrix = panel.indicators[indicator][rows]
    if np.isnan(matrix).any():
        raise InputError(
            f"indicator {indicator!r} still has missing cells; impute first"
        )
    return matrix


def to_sample_panels(
    panel: RawPanel,
    target: str | None = None,
    groups: tuple[str, str] | None = None,
    targets: tuple[str, str] | None = None,
) -> tuple[SamplePanel, SamplePanel]:
    """Slice a complete panel into a pair of SamplePanels.

    Two-sample mode (``target`` + ``groups``): X holds the rows of entities
    labelled groups[0], Y those labelled groups[1], for the one indicator.
    Independence mode (``targets``): X and Y hold all entities' rows for the
    two indicators, in identical entity order.
    """
    if (targets is None) == (groups is None):
        raise InputError("pass either target+groups (two-sample) or targets (independence)")
    if targets is not None:
        for name in targets:
            if name not in panel.indicators:
                raise InputError(f"unknown indicator/target: {name!r}")
        rows = np.arange(len(panel.entities))
        if rows.size < 2:
            raise SampleSizeError("independence mode needs at least 2 entities")
        x = _complete_rows(panel, targets[0], rows)
        y = _complete_rows(panel, targets[1], rows)
        return SamplePanel(x, panel.grid), SamplePanel(y, panel.grid)

    if target is None or target not in panel.indicators:
        raise InputError(f"unknown indicator/target: {target!r}")
    picked = []
    for label in groups:  # type: ignore[union-attr]
        rows = np.array(
            [i for i, e in enumerate(panel.entities) if panel.entity_groups.get(e) == label],
            dtype=np.intp,
        )
        if rows.size < 2:
            raise SampleSizeError(
                f"group {label!r} has {rows.size} entities; need at least 2"
            )
        picked.append(_complete_rows(panel, target, rows))
    return SamplePanel(picked[0], panel.grid), SamplePanel(picked[1], panel.grid)


def write_panel_csvs(panel: RawPanel, out_dir) -> list:
    """One wide CSV per indicator: entity column, then one column per year."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, matrix in panel.indicators.items():
        path = out / f"{_safe_name(name)}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["entity"] + [f"{y:g}" for y in panel.grid])
            for i, entity in enumerate(panel.entities):
                writer.writerow(
                    [entity] + ["" if np.isnan(v) else repr(float(v)) for v in matrix[i]]
                )
        paths.append(path)
    return paths


def _safe_name(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in name)


def write_manifest(path, schema: PanelSchema, report: list, panel: RawPanel) -> None:
    """Plain-text key-value manifest: schema echo, imputation stats, groups."""
    donor_counts = [entry["donors"] for entry in report]
    lines = [
        f"format = {MANIFEST_FORMAT_VERSION}",
        f"schema_format = {SCHEMA_FORMAT_VERSION}",
        "",
        "[schema]",
        f"layout = {schema.layout}",
        f"entity_column = {schema.entity_col}",
        f"year_column = {schema.year_col}",
        f"indicator_column = {schema.indicator_col}",
        f"value_column = {schema.value_col}",
        "",
        "[imputation]",
        f"cells_filled = {len(report)}",
        f"min_donors = {min(donor_counts) if donor_counts else 0}",
        f"max_donors = {max(donor_counts) if donor_counts else 0}",
        "",
        "[panel]",
        f"entities = {len(panel.entities)}",
        f"years = {panel.grid.size}",
        f"indicators = {len(panel.indicators)}",
        f"missing_cells = {panel.n_missing}",
        "",
        "[groups]",
    ]
    for entity, label in sorted(panel.entity_groups.items()):
        lines.append(f"{entity} = {label}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
