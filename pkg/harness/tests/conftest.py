import json
import subprocess
import sys

import numpy as np
import torch


def run_codeanon(*args):
    cmd = [sys.executable, "-m", "codeanon", *map(str, args)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, f"{cmd}\n{proc.stderr}"
    return proc


def function_records(n_functions: int, seed: int = 0) -> list[str]:
    """ast-json lines, one small function per line, for varmisuse building."""
    rng = np.random.default_rng(seed)
    lines = []
    for i in range(n_functions):
        n_vars = 3 + int(rng.integers(3))
        names = [f"f{i}v{k}" for k in range(n_vars)]
        body = []
        for name in names:
            for _ in range(2 + int(rng.integers(2))):
                t = ["NameLoad", "NameStore", "NameParam"][int(rng.integers(3))]
                body.append({"type": t, "value": name})
        rng.shuffle(body)
        nodes = [{"type": "FunctionDef", "value": f"fn{i}",
                  "children": list(range(1, len(body) + 1))}] + body
        lines.append(json.dumps(nodes))
    return lines


def build_varmisuse_dataset(tmp_path, n_functions: int, regime: str = "full",
                            budget: int = 32, seed: int = 0):
    src = tmp_path / "fns.json"
    src.write_text("\n".join(function_records(n_functions, seed)) + "\n")
    out = tmp_path / "vm.jsonl"
    run_codeanon("--seed", seed, "varmisuse", "--input", src, "--format",
                 "ast-json", "--regime", regime, "--placeholders", budget,
                 "--output", out)
    return out


def double_seeded(module: torch.nn.Module, seed: int) -> torch.nn.Module:
    torch.manual_seed(seed)
    for p in module.parameters():
        with torch.no_grad():
            p.copy_(torch.randn_like(p) * 0.3)
    return module.double()
