"""Compare the compiled and pure-Python dictionary-scan kernels.

    python benchmarks/bench_guess.py [--words 100000] [--repeat 3]
"""

import argparse
import random
import time

from cardproto import _kernels_py
from cardproto.adversary import Dictionary, extract_card, offline_guess
from cardproto.enrollment import ServerState, register_user
from cardproto.scheme_timestamp import build_login_t

try:
    from cardproto import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--words", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rng = random.Random(1)
    server, card = register_user(ServerState.create(rng), "alice", "not-in-dictionary")
    req, _ = build_login_t(card, "not-in-dictionary", 1000)
    ex = extract_card(card)
    words = Dictionary(f"guess{i:07d}" for i in range(args.words))

    import cardproto.adversary as adversary

    results = {}
    for name, mod in (("python", _kernels_py), ("cython", _kernels_c)):
        if mod is None:
            print(f"{name:>7}: not available")
            continue
        adversary.scan_guesses = mod.scan_guesses
        best = float("inf")
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            rep = offline_guess(ex, req, words)
            best = min(best, time.perf_counter() - t0)
        assert not rep.succeeded and rep.guesses_tried == args.words
        results[name] = best
        print(f"{name:>7}: {best:.3f} s  ({best / args.words * 1e9:.0f} ns/guess)")
    if len(results) == 2:
        print(f"speedup: {results['python'] / results['cython']:.1f}x")


if __name__ == "__main__":
    main()
