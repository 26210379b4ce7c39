"""Trace export: per-step CSV and an SVG of trajectories around the obstacles."""
import csv
from collections import OrderedDict
from pathlib import Path

from .env import trace_fields


def write_trace_csv(path, rows, n_obstacles):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(trace_fields(n_obstacles))
        w.writerows(rows)
    return path


def read_trace_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _paths(rows, starts):
    paths = OrderedDict()
    for r in rows:
        ep = int(r[0])
        if ep not in paths:
            paths[ep] = [tuple(starts[ep])] if starts is not None and ep < len(starts) else []
        paths[ep].append((float(r[2]), float(r[3])))
    return paths


_COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"]


def write_trajectory_svg(path, env_cfg, rows, starts=None, size=600, margin=0.5):
    """One polyline per episode, obstacle disks, goal circle and start squares."""
    paths = _paths(rows, starts)
    xs = [p[0] for pts in paths.values() for p in pts]
    ys = [p[1] for pts in paths.values() for p in pts]
    for b in env_cfg.obstacles.barriers:
        xs += [b.center[0] - b.radius, b.center[0] + b.radius]
        ys += [b.center[1] - b.radius, b.center[1] + b.radius]
    gx, gy = env_cfg.goal_center
    xs += [gx - env_cfg.goal_radius, gx + env_cfg.goal_radius]
    ys += [gy - env_cfg.goal_radius, gy + env_cfg.goal_radius]
    x0, x1 = min(xs) - margin, max(xs) + margin
    y0, y1 = min(ys) - margin, max(ys) + margin
    scale = size / max(x1 - x0, y1 - y0)

    def tx(x, y):
        return (x - x0) * scale, (y1 - y) * scale

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f'<rect width="{size}" height="{size}" fill="white"/>']
    for b in env_cfg.obstacles.barriers:
        cx, cy = tx(*b.center)
        out.append(f'<circle class="obstacle" cx="{cx:.2f}" cy="{cy:.2f}" r="{b.radius * scale:.2f}" '
                   'fill="#9ecae1" stroke="#3182bd"/>')
    cx, cy = tx(gx, gy)
    out.append(f'<circle class="goal" cx="{cx:.2f}" cy="{cy:.2f}" r="{env_cfg.goal_radius * scale:.2f}" '
               'fill="none" stroke="red" stroke-width="2"/>')
    for k, (ep, pts) in enumerate(paths.items()):
        color = _COLORS[k % len(_COLORS)]
        coords = " ".join("{:.2f},{:.2f}".format(*tx(x, y)) for x, y in pts)
        out.append(f'<polyline class="trajectory" data-episode="{ep}" points="{coords}" '
                   f'fill="none" stroke="{color}" stroke-width="1" stroke-opacity="0.7"/>')
        sx, sy = tx(*pts[0])
        out.append(f'<rect class="start" x="{sx - 3:.2f}" y="{sy - 3:.2f}" width="6" height="6" fill="{color}"/>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
    return path


def export_traces(out_dir, env_cfg, rows, starts=None):
    """Write ``traces.csv`` and ``trajectories.svg`` into ``out_dir``."""
    if not rows:
        raise ValueError("no traces recorded")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = write_trace_csv(out_dir / "traces.csv", rows, len(env_cfg.obstacles))
    svg_path = write_trajectory_svg(out_dir / "trajectories.svg", env_cfg, rows, starts)
    return svg_path, csv_path
