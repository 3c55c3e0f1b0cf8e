"""Secondary acceptance suite; prints one [PASS]/[FAIL] line per criterion
(visible with `pytest -s`). The mechanism check trains 6 toy models and is
the long pole (several minutes on CPU)."""

import functools
import time

import numpy as np
import pytest
import torch

from anonharness.configs import toy_completion, toy_varmisuse
from anonharness.data import collect_types, read_varmisuse
from anonharness.pointer import GenSwitch, gen_switch, pointer_mixture
from anonharness.synth import median_regime_gap
from anonharness.train import train_completion, train_varmisuse
from anonharness.vocab_ids import ValueTable

from conftest import build_varmisuse_dataset, double_seeded


def criterion(name):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            start = time.perf_counter()
            try:
                result = fn(*args, **kwargs)
            except BaseException:
                print(f"[FAIL] {name} ({time.perf_counter() - start:.2f}s)", flush=True)
                raise
            print(f"[PASS] {name} ({time.perf_counter() - start:.2f}s)", flush=True)
            return result
        return wrapper
    return deco


@criterion("pointer-mixture: normalization and oracle equivalence, 1000 inputs")
def test_pointer_mixture_1000():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        v = int(rng.integers(1, 20))
        l = int(rng.integers(1, 20))
        vocab = [f"w{i}" for i in range(v)]
        values = [f"w{int(rng.integers(0, v + 4))}" for _ in range(l)]
        p_model = rng.random(v) + 1e-3
        p_model /= p_model.sum()
        p_copy = rng.random(l) + 1e-3
        p_copy /= p_copy.sum()
        p_gen = float(rng.random())
        out = pointer_mixture(p_model, vocab, p_copy, p_gen, values)
        assert abs(sum(out.values()) - 1.0) <= 1e-6
        for token in set(vocab) | set(values):
            direct = p_gen * sum(p for t, p in zip(vocab, p_model) if t == token)
            direct += (1.0 - p_gen) * sum(p for t, p in zip(values, p_copy)
                                          if t == token)
            assert abs(out[token] - direct) <= 1e-9


@criterion("gen-switch: autograd gradient vs central differences, 1e-4 relative")
def test_gen_switch_gradient():
    rng = np.random.default_rng(7)
    for trial in range(10):
        width = int(rng.integers(2, 9))
        module = double_seeded(GenSwitch(width), seed=trial)
        h = torch.tensor(rng.normal(size=width), requires_grad=True)
        x = torch.tensor(rng.normal(size=width), requires_grad=True)
        module(h, x).backward()
        eps = 1e-6
        w_h = module.w_h.detach().numpy()
        w_i = module.w_i.detach().numpy()
        b = float(module.b.detach())
        h0 = h.detach().numpy()
        x0 = x.detach().numpy()

        def check(grad, bump):
            fd = np.array([
                (gen_switch(*bump(i, +eps)) - gen_switch(*bump(i, -eps))) / (2 * eps)
                for i in range(len(np.atleast_1d(grad)))])
            grad = np.atleast_1d(grad)
            rel = np.linalg.norm(grad - fd) / max(np.linalg.norm(fd), 1e-12)
            assert rel < 1e-4, rel

        check(module.w_h.grad.numpy(),
              lambda i, e: (w_h + e * np.eye(width)[i], w_i, b, h0, x0))
        check(module.w_i.grad.numpy(),
              lambda i, e: (w_h, w_i + e * np.eye(width)[i], b, h0, x0))
        check(module.b.grad.numpy(),
              lambda i, e: (w_h, w_i, b + e, h0, x0))
        check(h.grad.numpy(),
              lambda i, e: (w_h, w_i, b, h0 + e * np.eye(width)[i], x0))
        check(x.grad.numpy(),
              lambda i, e: (w_h, w_i, b, h0, x0 + e * np.eye(width)[i]))


@criterion("overfit-smoke: >=90% training-loss reduction, 32 examples, 200 steps, both tasks")
def test_overfit_both_tasks(tmp_path):
    rng = np.random.default_rng(0)
    chunks = []
    for s in range(32):
        nodes = []
        for _ in range(8):
            ident = f"var{1 + int(rng.integers(24))}"
            nodes.extend([["Decl", ident], ["Use", ident]])
        chunks.append({"sid": f"s{s}", "off": 0, "loss_start": 0, "nodes": nodes})
    table = ValueTable(entries=[], placeholder_budget=24)
    types = collect_types(chunks)
    config = toy_completion(seq_len=32, placeholder_budget=24, steps=200, seed=0)
    _, losses = train_completion(config, chunks, types, table)
    assert losses[-1] <= 0.1 * losses[0], \
        f"completion loss only {losses[0]:.3f} -> {losses[-1]:.3f}"

    path = build_varmisuse_dataset(tmp_path, n_functions=8, seed=1)
    examples = read_varmisuse(str(path))[:32]
    assert len(examples) == 32
    vtable = ValueTable(entries=[], placeholder_budget=32)
    vtypes = collect_types(examples)
    vconfig = toy_varmisuse(seq_len=64, placeholder_budget=32, steps=200, seed=0)
    _, vlosses = train_varmisuse(vconfig, examples, vtypes, vtable)
    assert vlosses[-1] <= 0.1 * vlosses[0], \
        f"varmisuse loss only {vlosses[0]:.3f} -> {vlosses[-1]:.3f}"


@criterion("mechanism-check: oov-anon beats unk by >=10 points, median of 3 seeds")
def test_mechanism_gap(tmp_path):
    def config_for_seed(seed):
        return toy_completion(seq_len=64, placeholder_budget=64, steps=2000,
                              seed=seed)

    result = median_regime_gap(tmp_path, seeds=(0, 1, 2),
                               config_for_seed=config_for_seed,
                               n_train=5000, n_eval=1000, pairs=16, budget=64)
    print(f"  oov={result['median_oov']:.3f} unk={result['median_unk']:.3f} "
          f"gap={result['median_gap']:.3f}", flush=True)
    assert result["median_gap"] >= 0.10, result


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-v", "-s"]))
