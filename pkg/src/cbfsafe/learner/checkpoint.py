"""JSON checkpoints: config echo plus every parameter array as nested lists."""
import json
from pathlib import Path

import numpy as np

from ..config import config_from_dict
from ..errors import ConfigError
from .mlp import Mlp
from .sac import SafeSacAgent

VERSION = "cbf-safelayer-ckpt-1"


def _dump_mlp(net):
    return {
        "layer_sizes": list(net.layer_sizes),
        "weights": [w.tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
    }


def _load_mlp(d):
    return Mlp(tuple(d["layer_sizes"]), [np.array(w, dtype=float) for w in d["weights"]],
               [np.array(b, dtype=float) for b in d["biases"]])


def save_checkpoint(path, agent, run_config):
    doc = {
        "version": VERSION,
        "config": run_config.to_dict(),
        "policy": {**_dump_mlp(agent.policy.net), "action_dim": agent.policy.action_dim,
                   "action_scale": agent.policy.action_scale},
        "critic": {k: _dump_mlp(getattr(agent.critic, k)) for k in ("q1", "q2", "target1", "target2")},
    }
    # repr-exact floats keep reloads bit-identical
    Path(path).write_text(json.dumps(doc, indent=1))
    return path


def load_checkpoint(path):
    """Returns ``(agent, run_config)``."""
    doc = json.loads(Path(path).read_text())
    if doc.get("version") != VERSION:
        raise ConfigError("version", f"unsupported checkpoint version {doc.get('version')!r}")
    cfg = config_from_dict(doc["config"])
    agent = SafeSacAgent(cfg.env, cfg.sac, cfg.filter, np.random.default_rng(0))
    # copy into the existing arrays so the optimizers stay bound to them
    _into(agent.policy.net, _load_mlp(doc["policy"]))
    agent.policy.action_scale = float(doc["policy"]["action_scale"])
    for k in ("q1", "q2", "target1", "target2"):
        _into(getattr(agent.critic, k), _load_mlp(doc["critic"][k]))
    return agent, cfg


def _into(net, loaded):
    if tuple(net.layer_sizes) != tuple(loaded.layer_sizes):
        raise ConfigError("sac.hidden", f"checkpoint layers {loaded.layer_sizes} != config {net.layer_sizes}")
    net.set_flat(loaded.flat())
