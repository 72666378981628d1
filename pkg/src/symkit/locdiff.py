"""Line-diff statistics over a longest-common-subsequence alignment.

Blank lines (whitespace-only) are excluded before diffing, consistent with
the bundle LOC rule. The alignment is canonical and documented so the
counts are reproducible:

  walking both sequences from the front, equal lines are always matched
  (safe for LCS optimality); otherwise the side whose remaining suffix
  keeps the longer common subsequence advances. When both suffixes keep
  the same length, the side whose current line sorts lower advances;
  this tie-break is what makes the statistics exactly symmetric under
  swapping the inputs.

Within each gap between consecutive matches, a deleted line paired with an
inserted line counts as one modified line; leftovers count as added or
deleted. Swapping the inputs therefore swaps added and deleted and
preserves modified.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class DiffStat:
    added: int = 0
    modified: int = 0
    deleted: int = 0

    def __add__(self, other: "DiffStat") -> "DiffStat":
        return DiffStat(self.added + other.added,
                        self.modified + other.modified,
                        self.deleted + other.deleted)

    @property
    def total(self) -> int:
        return self.added + self.modified + self.deleted

    def to_json(self) -> dict:
        return {"added": self.added, "modified": self.modified, "deleted": self.deleted}


def significant_lines(text: str) -> list[str]:
    return [line for line in text.splitlines() if line.strip()]


def count_loc(text: str) -> int:
    return len(significant_lines(text))


def diff_lines(old: str, new: str) -> DiffStat:
    return diff_sequences(significant_lines(old), significant_lines(new))


def diff_sequences(old: list[str], new: list[str]) -> DiffStat:
    matches = lcs_alignment(old, new)
    added = modified = deleted = 0
    pi = pj = 0
    for i, j in matches + [(len(old), len(new))]:
        gap_old = i - pi
        gap_new = j - pj
        paired = min(gap_old, gap_new)
        modified += paired
        deleted += gap_old - paired
        added += gap_new - paired
        pi, pj = i + 1, j + 1
    return DiffStat(added, modified, deleted)


def lcs_alignment(old: list[str], new: list[str]) -> list[tuple[int, int]]:
    """Matched index pairs of the canonical LCS alignment (see module doc)."""
    n, m = len(old), len(new)
    # suffix[i][j] = LCS length of old[i:] vs new[j:]
    suffix = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row = suffix[i]
        below = suffix[i + 1]
        for j in range(m - 1, -1, -1):
            if old[i] == new[j]:
                row[j] = below[j + 1] + 1
            else:
                bj = below[j]
                rj = row[j + 1]
                row[j] = bj if bj >= rj else rj
    matches: list[tuple[int, int]] = []
    i = j = 0
    while i < n and j < m:
        if old[i] == new[j]:
            matches.append((i, j))
            i += 1
            j += 1
        elif suffix[i + 1][j] > suffix[i][j + 1]:
            i += 1
        elif suffix[i + 1][j] < suffix[i][j + 1]:
            j += 1
        elif old[i] < new[j]:
            i += 1
        else:
            j += 1
    return matches


def diff_bundles(old_files: dict[str, str], new_files: dict[str, str]) -> DiffStat:
    """Per-file diff summed over the union of paths. A file only present in
    `new` contributes all its LOC as added (symmetrically for deleted); a
    renamed file therefore counts as a full delete plus add."""
    total = DiffStat()
    for path in sorted(set(old_files) | set(new_files)):
        total = total + diff_lines(old_files.get(path, ""), new_files.get(path, ""))
    return total
