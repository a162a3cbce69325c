"""Flat binary model container shared by all model save/load paths.

Layout: magic "ITNN", u32 version, u64 header length, UTF-8 JSON header,
then the named float64 arrays concatenated little-endian in header order.
The header carries an arbitrary JSON metadata block plus the array manifest
(name, shape).
"""

import json
import struct

import numpy as np

from . import nncore

MAGIC = b"ITNN"
VERSION = 1


def write_container(path, meta, arrays):
    """arrays: ordered dict of name -> float64 ndarray."""
    manifest = [{"name": name, "shape": list(arr.shape)} for name, arr in arrays.items()]
    header = json.dumps({"meta": meta, "arrays": manifest}, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        for arr in arrays.values():
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def read_container(path):
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ValueError(f"{path}: not an ITNN container")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != VERSION:
            raise ValueError(f"{path}: unsupported container version {version}")
        (hlen,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(hlen).decode())
        arrays = {}
        for entry in header["arrays"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(count * 8)
            arrays[entry["name"]] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()
    return header["meta"], arrays


# --- network spec <-> json ---------------------------------------------------

def spec_to_json(spec):
    layers = []
    for desc in spec.layers:
        d = {"type": type(desc).__name__}
        d.update(vars(desc))
        layers.append(d)
    return {"layers": layers, "input_shape": list(spec.input_shape)}


def spec_from_json(data):
    kinds = {
        "Dense": nncore.Dense,
        "Conv1D": nncore.Conv1D,
        "MaxPool1D": nncore.MaxPool1D,
        "Dropout": nncore.Dropout,
        "Flatten": nncore.Flatten,
    }
    layers = []
    for d in data["layers"]:
        kwargs = {k: v for k, v in d.items() if k != "type"}
        layers.append(kinds[d["type"]](**kwargs))
    return nncore.NetworkSpec(tuple(layers), tuple(data["input_shape"]))


def network_arrays(net, prefix=""):
    """Named parameter arrays of a network, in layer order."""
    arrays = {}
    for i, layer in enumerate(net.layers):
        for j, p in enumerate(layer.params):
            arrays[f"{prefix}layer{i}.p{j}"] = p
    return arrays


def save_network(net, path, extra_meta=None, extra_arrays=None):
    meta = {"kind": "network", "spec": spec_to_json(net.spec)}
    if extra_meta:
        meta.update(extra_meta)
    arrays = network_arrays(net)
    if extra_arrays:
        arrays.update(extra_arrays)
    write_container(path, meta, arrays)


def load_network(path):
    meta, arrays = read_container(path)
    net = restore_network(meta["spec"], arrays)
    return net, meta, arrays


def restore_network(spec_json, arrays, prefix=""):
    spec = spec_from_json(spec_json)
    net = nncore.init_network(spec, seed=0)
    for i, layer in enumerate(net.layers):
        for j in range(len(layer.params)):
            stored = arrays[f"{prefix}layer{i}.p{j}"]
            if stored.shape != layer.params[j].shape:
                raise ValueError("stored parameter shape mismatch")
            layer.params[j][...] = stored
    return net
