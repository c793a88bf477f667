"""Split composition and mixture accounting.

Two jobs live here. `compose_splits` turns a flat list of quadruples into
train/val/test manifests, keeping every clip's rows inside a single split so
no audio leaks across the boundary. `composition_report` does the bookkeeping
over per-subset row counts: each subset's share of the total, optional group
subtotals, and a comparison against target percentages.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..data import SPLIT_NAMES, DatasetManifest, QAQuadruple
from ..errors import ConfigError, DataError

DEFAULT_FRACTIONS = {"train": 0.8, "val": 0.1, "test": 0.1}


@dataclass
class CompositionReport:
    """Per-subset counts and percentages, with optional group rollups."""

    subset_counts: dict[str, int]
    subset_percent: dict[str, float]
    total: int
    group_counts: dict[str, int] = field(default_factory=dict)
    group_percent: dict[str, float] = field(default_factory=dict)
    target_percent: dict[str, float] = field(default_factory=dict)
    deviation: dict[str, float] = field(default_factory=dict)

    def lines(self) -> list[str]:
        out = [f"total rows: {self.total}"]
        for name in sorted(self.subset_counts):
            out.append(f"  {name}: {self.subset_counts[name]} "
                       f"({self.subset_percent[name]:.1f}%)")
        for name in sorted(self.group_counts):
            line = (f"group {name}: {self.group_counts[name]} "
                    f"({self.group_percent[name]:.1f}%)")
            if name in self.deviation:
                line += f" [target {self.target_percent[name]:.1f}%, " \
                        f"off by {self.deviation[name]:+.2f}]"
            out.append(line)
        return out


def composition_report(
    subset_counts: dict[str, int],
    subset_groups: dict[str, str] | None = None,
    targets: dict[str, float] | None = None,
) -> CompositionReport:
    """Account for a mixture given per-subset row counts.

    subset_groups maps a subset name to a group label (for example several
    synthetic subsets rolling up into one "synthetic" line). targets, when
    given, maps group or subset names to expected percentages and fills the
    deviation table.
    """
    if not subset_counts:
        raise DataError("no subset counts given")
    for name, count in subset_counts.items():
        if count < 0:
            raise DataError(f"subset {name!r} has negative count {count}")
    total = sum(subset_counts.values())
    if total == 0:
        raise DataError("all subset counts are zero")
    percent = {name: 100.0 * count / total
               for name, count in subset_counts.items()}

    group_counts: dict[str, int] = {}
    if subset_groups:
        for name, count in subset_counts.items():
            group = subset_groups.get(name, name)
            group_counts[group] = group_counts.get(group, 0) + count
    group_percent = {g: 100.0 * c / total for g, c in group_counts.items()}

    target_percent = dict(targets or {})
    deviation = {}
    for name, want in target_percent.items():
        have = group_percent.get(name, percent.get(name))
        if have is not None:
            deviation[name] = have - want

    return CompositionReport(
        subset_counts=dict(subset_counts),
        subset_percent=percent,
        total=total,
        group_counts=group_counts,
        group_percent=group_percent,
        target_percent=target_percent,
        deviation=deviation,
    )


def _clip_key(row: QAQuadruple) -> str:
    return row.audio1_id


def compose_splits(
    rows: list[QAQuadruple],
    fractions: dict[str, float] | None = None,
    seed: int = 0,
) -> dict[str, DatasetManifest]:
    """Partition rows into split manifests without clip leakage.

    Rows are grouped by their first audio id, the groups are shuffled with a
    seeded generator, and whole groups are dealt out to splits until each
    split's row-count target is met. The last named split absorbs the
    remainder, so the realized fractions are approximate when groups are
    large relative to the corpus.
    """
    fractions = dict(fractions or DEFAULT_FRACTIONS)
    if not rows:
        raise DataError("no rows to split")
    if not fractions:
        raise ConfigError("no split fractions given")
    for split, frac in fractions.items():
        if split not in SPLIT_NAMES:
            raise ConfigError(f"unknown split {split!r}")
        if frac < 0:
            raise ConfigError(f"fraction for {split!r} is negative")
    frac_total = sum(fractions.values())
    if abs(frac_total - 1.0) > 1e-9:
        raise ConfigError(f"fractions sum to {frac_total}, expected 1")
    for row in rows:
        row.validate()

    groups: dict[str, list[QAQuadruple]] = {}
    for row in rows:
        groups.setdefault(_clip_key(row), []).append(row)
    keys = sorted(groups)
    rng = np.random.default_rng(seed)
    order = [keys[i] for i in rng.permutation(len(keys))]

    split_names = [s for s in SPLIT_NAMES if s in fractions]
    targets = {s: fractions[s] * len(rows) for s in split_names}
    assigned: dict[str, list[QAQuadruple]] = {s: [] for s in split_names}
    cursor = 0
    for key in order:
        # advance to the next split once this one has met its target,
        # but never past the last split
        while (cursor < len(split_names) - 1
               and len(assigned[split_names[cursor]]) >= targets[split_names[cursor]]):
            cursor += 1
        assigned[split_names[cursor]].extend(groups[key])

    manifests = {}
    for split in split_names:
        split_rows = assigned[split]
        composition = {}
        if split_rows:
            counts: dict[str, int] = {}
            for row in split_rows:
                counts[row.source] = counts.get(row.source, 0) + 1
            composition = {src: 100.0 * c / len(split_rows)
                           for src, c in counts.items()}
        manifest = DatasetManifest(split=split, rows=split_rows,
                                   composition=composition)
        manifest.validate()
        manifests[split] = manifest
    return manifests
