import random
from collections import Counter

from hypothesis import given
from hypothesis import strategies as st

from klsm.block import Block, Item
from klsm.oracle.driver import Driver, explore
from klsm.queue import KLSM
from klsm.shared import BlockArray, BlockBloom, TabulationHash
from helpers import block


def arr(*blocks, k=None):
    a = BlockArray(list(blocks))
    if k is not None:
        a.calculate_pivots(k)
    return a


def brute_candidates(a: BlockArray, k: int) -> list[int]:
    return sorted(key for b in a.blocks for key in b.keys())[: k + 1]


class TestBloom:
    def test_tabulation_is_deterministic(self):
        h1, h2 = TabulationHash(random.Random(1)), TabulationHash(random.Random(1))
        assert all(h1(x) == h2(x) for x in range(100))
        assert len({h1(x) for x in range(100)}) == 100

    def test_mask_has_one_or_two_bits(self):
        bloom = BlockBloom(7)
        for h in range(64):
            assert 1 <= bin(bloom.mask(h)).count("1") <= 2

    @given(st.lists(st.lists(st.integers(0, 200), min_size=1, max_size=4), min_size=1,
                    max_size=8), st.integers(0, 3))
    def test_no_false_negatives_after_merges(self, groups, seed):
        bloom = BlockBloom(seed)
        blocks = []
        for g in groups:
            bits = 0
            for h in g:
                bits |= bloom.mask(h)
            blocks.append((Block(0, bloom=bits), set(g)))
        while len(blocks) > 1:
            (a, ga), (b, gb) = blocks.pop(), blocks.pop()
            dst = Block(1)
            dst.merge_in(a, b)
            blocks.append((dst, ga | gb))
        b, members = blocks[0]
        assert all(BlockBloom.query(b.bloom, bloom.mask(h)) for h in members)


class TestArrayInsert:
    def test_into_empty(self):
        a = BlockArray()
        a.insert(block(2, 9, 8, 7))
        assert a.size == 1

    def test_position(self):
        a = arr(block(3, 9, 8, 7, 6, 5), block(1, 2, 1))
        a.insert(block(2, 4, 3, 3))
        assert a.levels() == [3, 2, 1]

    def test_equal_level_merges(self):
        a = arr(block(2, 9, 8, 7))
        a.insert(block(2, 6, 5, 4))
        assert a.levels() == [3] and a.blocks[0].keys() == [9, 8, 7, 6, 5, 4]


class TestArrayConsolidate:
    def test_shrink_and_merge(self):
        a = arr(block(2, 9, 7, 4, 2, taken=(4, 2)), block(1, 6, 5))
        assert a.consolidate()
        assert [(b.level, b.keys()) for b in a.blocks] == [(2, [9, 7, 6, 5])]

    def test_unchanged(self):
        src = [block(2, 9, 7, 4), block(0, 1)]
        a = arr(*src)
        assert not a.consolidate()
        assert a.blocks == src

    def test_all_taken(self):
        a = arr(block(1, 5, 4, taken=(5, 4)), block(0, 1, taken=(1,)))
        assert not a.consolidate()
        assert a.size == 0


class TestPivots:
    def test_example(self):
        a = arr(block(3, 18, 12, 11, 9, 7, 3), block(2, 13, 11, 8, 4), k=3)
        assert a.pivots == [4, 2] and a.candidate_count() == 4
        assert max(it.key for it in a.candidates()) == 8
        assert sorted(it.key for it in a.candidates()) == brute_candidates(a, 3)

    def test_single(self):
        for k in (0, 1, 9):
            a = arr(block(0, 5), k=k)
            assert a.pivots == [0] and a.candidate_count() == 1

    def test_k0(self):
        a = arr(block(1, 9, 7), block(0, 4), k=0)
        assert [it.key for it in a.candidates()] == [4]

    @given(st.lists(st.lists(st.integers(0, 20), min_size=1, max_size=16), min_size=1,
                    max_size=5), st.integers(0, 40))
    def test_matches_brute_force(self, runs, k):
        blocks = [Block(max(0, (len(r) - 1).bit_length()),
                        [Item(x) for x in sorted(r, reverse=True)])
                  for r in runs]
        a = arr(*blocks, k=k)
        c = a.candidate_count()
        assert 1 <= c <= k + 1
        assert sorted(it.key for it in a.candidates()) == brute_candidates(a, k)
        for b, p in zip(a.blocks, a.pivots):
            live = b.keys()
            assert all(x >= y for x in live[:p] for y in live[p:])


class TestFindMin:
    def test_single_candidate(self):
        a = arr(block(0, 5), k=4)
        for s in range(20):
            assert a.find_min(random.Random(s)).key == 5

    def test_uniform(self):
        a = arr(block(3, 18, 12, 11, 9, 7, 3), block(2, 13, 11, 8, 4), k=3)
        rng = random.Random(12345)
        n = 100_000
        freq = Counter(a.find_min(rng).key for _ in range(n))
        assert set(freq) == {3, 4, 7, 8}
        for key in (3, 4, 7, 8):
            assert abs(freq[key] / n - 0.25) <= 0.02

    def test_taken_pick_falls_back_to_tail(self):
        a = arr(block(2, 9, 8, 7, 6, taken=(7,)), k=3)
        seen = {a.find_min(random.Random(s)).key for s in range(50)}
        assert 7 not in seen and seen <= {9, 8, 6}

    def test_own_smaller_item_wins(self):
        bloom = BlockBloom(0)
        mask = bloom.mask(3)
        a = BlockArray([block(0, 8), block(1, 9, 6, bloom=mask)], [0, 2])
        assert a.find_min(random.Random(0)).key == 8
        assert a.find_min(random.Random(0), mask).key == 6

    def test_empty_ranges_fall_back_to_minimum(self):
        a = BlockArray([block(1, 9, 5), block(0, 7)], [2, 1])
        assert a.find_min(random.Random(0)).key == 5


def two_handles(k=0):
    q = KLSM(k, 2)
    return q, q.register_handle(), q.register_handle()


class TestSnapshots:
    def test_refresh(self):
        q, h0, h1 = two_handles()
        h0.insert(5)
        published = q.shared.published()
        q.shared.refresh_snapshot(h1)
        assert h1.observed is published and h1.snapshot is not published
        assert h1.snapshot.blocks == published.blocks and h1.snapshot.pivots == published.pivots

    def test_refresh_empty(self):
        q, h0, _ = two_handles()
        q.shared.refresh_snapshot(h0)
        assert h0.observed is None and h0.snapshot is None

    def test_push_races(self):
        q, h0, h1 = two_handles()
        h0.insert(5)
        q.shared.refresh_snapshot(h1)
        assert q.shared.push_snapshot(h1)
        q.shared.refresh_snapshot(h1)
        h0.insert(3)  # publishes in between
        assert not q.shared.push_snapshot(h1)
        q.shared.refresh_snapshot(h1)
        assert q.shared.push_snapshot(h1)

    def test_published_arrays_are_never_modified(self):
        prog = [[("I", 4), ("I", 2), ("D",)], [("I", 3), ("D",), ("D",)]]
        for seed in range(30):
            seen = []

            def fingerprint(a):
                return [(id(b), b.level, [id(it) for it in b.items]) for b in a.blocks], \
                    list(a.pivots)

            d = Driver(prog, 0, seed=seed,
                       on_publish=lambda d, a: a is not None and seen.append((a, fingerprint(a))))
            d.run_random(random.Random(seed))
            assert seen
            for a, fp in seen:
                assert fingerprint(a) == fp


class TestSharedInsert:
    def test_into_empty(self):
        q, h0, _ = two_handles()
        h0.insert(1)
        assert q.shared.published().size == 1

    def test_concurrent_insert_retries_once(self):
        d = Driver([[("I", 1)], [("I", 2)]], 0)
        # both read the empty array, both attempt the swap
        d.run([0, 1, 0, 1, 0, 1])
        d.run_round_robin()
        assert d.queue.shared.cas_failures.value == 1
        keys = sorted(k for b in d.queue.shared.published().blocks for k in b.keys())
        assert keys == [1, 2]

    def test_merges_equal_level(self):
        q = KLSM(0, 1)
        h = q.register_handle()
        q.shared.insert(h, block(2, 9, 8, 7))
        q.shared.insert(h, block(2, 6, 5, 4))
        a = q.shared.published()
        assert a.levels() == [3]

    def test_cas_failure_implies_progress(self):
        prog = [[("I", 1), ("I", 2)], [("I", 3)]]

        def check(d):
            s = d.queue.shared
            return None if s.cas_failures.value <= s.publications.value else "failure w/o progress"

        r = explore(prog, 0, check=check)
        assert r.schedules > 20 and not r.violations


class TestSharedFindMin:
    def test_live(self):
        q, h0, h1 = two_handles()
        h0.insert(5)
        assert q.shared.find_min(h1).key == 5

    def test_all_taken_cleans_up(self):
        q, h0, h1 = two_handles()
        h0.insert(5)
        h0.insert(6)
        for b in q.shared.published().blocks:
            for it in b.items:
                it.taken = True
        before = q.shared.publications.value
        assert q.shared.find_min(h1) is None
        assert q.shared.publications.value == before + 1
        assert q.shared.published() is None

    def test_taken_min_skipped(self):
        q, h0, h1 = two_handles(k=0)
        for x in (5, 3, 4):
            h0.insert(x)
        a = q.shared.published()
        (three,) = [it for b in a.blocks for it in b.items if it.key == 3]
        three.taken = True
        assert q.shared.find_min(h1).key == 4
