"""Diff statistics against an independent brute-force LCS oracle."""

import random
from functools import lru_cache

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symkit.locdiff import DiffStat, count_loc, diff_bundles, diff_lines, diff_sequences


# --- oracle: direct recursive statement of the documented alignment policy ---

def oracle_alignment(old: tuple, new: tuple):
    @lru_cache(maxsize=None)
    def lcs_len(i, j):
        if i == len(old) or j == len(new):
            return 0
        if old[i] == new[j]:
            return 1 + lcs_len(i + 1, j + 1)
        return max(lcs_len(i + 1, j), lcs_len(i, j + 1))

    pairs = []
    i = j = 0
    while i < len(old) and j < len(new):
        if old[i] == new[j]:
            pairs.append((i, j))
            i, j = i + 1, j + 1
        elif lcs_len(i + 1, j) > lcs_len(i, j + 1):
            i += 1
        elif lcs_len(i + 1, j) < lcs_len(i, j + 1):
            j += 1
        elif old[i] < new[j]:
            i += 1
        else:
            j += 1
    return pairs


def oracle_stat(old: list, new: list) -> DiffStat:
    added = modified = deleted = 0
    pi = pj = 0
    for i, j in oracle_alignment(tuple(old), tuple(new)) + [(len(old), len(new))]:
        gap_old, gap_new = i - pi, j - pj
        paired = min(gap_old, gap_new)
        modified += paired
        deleted += gap_old - paired
        added += gap_new - paired
        pi, pj = i + 1, j + 1
    return DiffStat(added, modified, deleted)


def random_case(rng: random.Random, max_len: int = 50):
    alphabet = [f"line{k}" for k in range(rng.randint(1, 8))]
    old = [rng.choice(alphabet) for _ in range(rng.randint(0, max_len))]
    new = [rng.choice(alphabet) for _ in range(rng.randint(0, max_len))]
    return old, new


def test_identical_texts():
    text = "\n".join(f"l{i}" for i in range(10))
    assert diff_lines(text, text) == DiffStat(0, 0, 0)


def test_single_replacement_in_ten_lines():
    old_lines = [f"line {i}" for i in range(10)]
    new_lines = list(old_lines)
    new_lines[4] = "changed"
    # Expected value frozen from the brute-force oracle.
    assert oracle_stat(old_lines, new_lines) == DiffStat(0, 1, 0)
    assert diff_sequences(old_lines, new_lines) == DiffStat(0, 1, 0)


def test_pure_append():
    old = "a\nb\nc\n"
    new = old + "d\ne\nf\n"
    assert diff_lines(old, new) == DiffStat(3, 0, 0)


def test_blank_lines_ignored():
    assert diff_lines("a\n\nb\n", "a\nb\n") == DiffStat(0, 0, 0)
    assert count_loc("x\n\n  \ny\n") == 2


def test_agrees_with_oracle_on_seeded_cases():
    rng = random.Random(20240531)
    for _ in range(120):
        old, new = random_case(rng)
        assert diff_sequences(old, new) == oracle_stat(old, new)


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_symmetry(data):
    alphabet = st.sampled_from(["a", "b", "c", "d"])
    old = data.draw(st.lists(alphabet, max_size=25))
    new = data.draw(st.lists(alphabet, max_size=25))
    fwd = diff_sequences(old, new)
    rev = diff_sequences(new, old)
    assert fwd.added == rev.deleted
    assert fwd.deleted == rev.added
    assert fwd.modified == rev.modified


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_totals_bound_by_lcs(data):
    alphabet = st.sampled_from(["a", "b", "c"])
    old = data.draw(st.lists(alphabet, max_size=20))
    new = data.draw(st.lists(alphabet, max_size=20))
    stat = diff_sequences(old, new)
    pairs = oracle_alignment(tuple(old), tuple(new))
    assert stat.added + stat.modified == len(new) - len(pairs)
    assert stat.deleted + stat.modified == len(old) - len(pairs)


def test_bundle_new_file_counts_as_added():
    old = {"a.js": "x\ny\n"}
    new = {"a.js": "x\ny\n", "b.js": "\n".join(f"l{i}" for i in range(20)) + "\n"}
    assert diff_bundles(old, new) == DiffStat(20, 0, 0)


def test_bundle_identity():
    files = {"a.js": "x\n", "b/c.js": "y\nz\n"}
    assert diff_bundles(files, dict(files)) == DiffStat(0, 0, 0)


def test_bundle_rename_is_delete_plus_add():
    old = {"a.js": "x\ny\n"}
    new = {"renamed.js": "x\ny\n"}
    assert diff_bundles(old, new) == DiffStat(2, 0, 2)


@pytest.mark.parametrize("old,new,expected", [
    ("", "", DiffStat(0, 0, 0)),
    ("", "a\n", DiffStat(1, 0, 0)),
    ("a\n", "", DiffStat(0, 0, 1)),
    ("a\nb\n", "b\na\n", DiffStat(1, 0, 1)),
])
def test_edge_cases(old, new, expected):
    assert diff_lines(old, new) == expected
