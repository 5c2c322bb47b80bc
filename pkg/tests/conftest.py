import random

import pytest

from cluster_twist.seeds import Seed, make_seed, principal_seed

ACCEPTANCE_RESULTS = []


@pytest.fixture
def record_criterion():
    def _record(number, ok, detail=""):
        ACCEPTANCE_RESULTS.append((number, ok, detail))

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if ok else "FAIL"
        line = f"criterion {number}: {status}"
        if detail and not ok:
            line += f"  ({detail})"
        terminalreporter.write_line(line)


@pytest.fixture
def a1_seed():
    return make_seed([[0, 1], [-1, 0]], frozen=[1])


@pytest.fixture
def sl3_seed():
    # one unfrozen vertex, exchange relation A1*A1' = A2 + A3
    return make_seed([[0, -1, 1], [1, 0, 0], [-1, 0, 0]], frozen=[1, 2])


@pytest.fixture
def digon_seed():
    return make_seed(
        [[0, -1, 0, 1], [1, 0, -1, 0], [0, 1, 0, -1], [-1, 0, 1, 0]],
        frozen=[0, 2],
    )


@pytest.fixture
def a2_principal():
    return principal_seed([[0, 1], [-1, 0]], (1, 1))


@pytest.fixture
def b2_principal():
    return principal_seed([[0, 1], [-2, 0]], (1, 2))


def random_symmetrizable_seed(rng: random.Random, n=None, spread=2, d_choices=(1, 1, 2), require_full_rank=False):
    """Random seed with integer exchange data skew-symmetrized by a random
    positive diagonal: entries b_ij = d_i * s_ij for a skew integer s."""
    for _ in range(200):
        size = n if n is not None else rng.randint(2, 5)
        d = [rng.choice(d_choices) for _ in range(size)]
        s = [[0] * size for _ in range(size)]
        for i in range(size):
            for j in range(i + 1, size):
                v = rng.randint(-spread, spread)
                s[i][j] = v
                s[j][i] = -v
        b = [[d[i] * s[i][j] for j in range(size)] for i in range(size)]
        n_frozen = rng.randint(0, size - 1)
        frozen = sorted(rng.sample(range(size), n_frozen))
        try:
            seed = make_seed(b, frozen=frozen, d=d)
        except ValueError:
            continue
        if require_full_rank and seed.b_tilde().rank() < seed.partition.n_unfrozen:
            continue
        return seed
    raise RuntimeError("could not generate a seed with the requested properties")


def random_sequence(rng: random.Random, seed: Seed, max_len=6):
    length = rng.randint(0, max_len)
    return tuple(rng.choice(seed.unfrozen) for _ in range(length))


def relabeled_copy(seed: Seed, rng: random.Random):
    """A similar seed obtained by permuting the unfrozen block in place."""
    uf = list(seed.unfrozen)
    perm = uf[:]
    rng.shuffle(perm)
    mapping = dict(zip(uf, perm))
    # require the permutation to respect the symmetrizers
    if any(seed.d[i] != seed.d[mapping[i]] for i in uf):
        return None
    full = [mapping.get(i, i) for i in range(seed.n)]
    rows = [[0] * seed.n for _ in range(seed.n)]
    for i in range(seed.n):
        for j in range(seed.n):
            rows[full[i]][full[j]] = seed.b[i, j]
    try:
        out = make_seed(rows, frozen=seed.frozen, d=seed.d)
    except ValueError:
        return None
    return out, mapping


@pytest.fixture(scope="session")
def corpus():
    """Shared randomized (seed, sequence) corpus: at least 200 instances,
    n <= 5, depth <= 6, full-rank exchange columns, non-constant
    symmetrizers included.

    Entry sizes and depths are mixed so that the deepest sequences pair
    with the tamest exchange entries; Laurent supports stay desk-scale.
    """
    rng = random.Random(20240815)
    out = []
    while len(out) < 130:
        seed = random_symmetrizable_seed(rng, spread=1, require_full_rank=True)
        out.append((seed, random_sequence(rng, seed, max_len=6)))
    while len(out) < 190:
        seed = random_symmetrizable_seed(rng, spread=2, require_full_rank=True)
        out.append((seed, random_sequence(rng, seed, max_len=4)))
    while len(out) < 205:
        seed = random_symmetrizable_seed(rng, n=3, spread=2, require_full_rank=True)
        out.append((seed, random_sequence(rng, seed, max_len=6)))
    # make sure genuinely skew-symmetrizable (non-symmetric) data is present
    assert any(len(set(s.d)) > 1 for s, _ in out)
    assert any(len(seq) == 6 for _, seq in out)
    return out
