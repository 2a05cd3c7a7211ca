"""Containment scoring: particle counts and the Monte-Carlo inside score."""

import numpy as np

from .config import MAX_INSIDE_FRACTION, MUG_RECEPTACLE

_MC_SAMPLES = 10_000
_MC_SEED = 20240401
_sample_cache = {}


def points_in_cylinder(points, center_xy, r_inner, z_lo, z_hi):
    """Boolean mask of points inside an upright cylinder volume."""
    points = np.asarray(points, dtype=float)
    dx = points[..., 0] - center_xy[0]
    dy = points[..., 1] - center_xy[1]
    radial = dx * dx + dy * dy <= r_inner**2
    return radial & (points[..., 2] >= z_lo) & (points[..., 2] <= z_hi)


def capsule_volume_samples(radius, cyl_len, n=_MC_SAMPLES, seed=_MC_SEED):
    """Uniform volume samples of a capsule along +x, centered at the origin.

    Cached per geometry; the fixed seed keeps the score deterministic.
    """
    key = (round(radius, 12), round(cyl_len, 12), n, seed)
    if key not in _sample_cache:
        rng = np.random.default_rng(seed)
        v_cyl = np.pi * radius**2 * cyl_len
        v_sph = 4.0 / 3.0 * np.pi * radius**3
        p_cyl = v_cyl / (v_cyl + v_sph)
        u = rng.uniform(size=n)
        # rejection-free: cylinder part + sphere part shifted to the caps
        x = np.empty(n)
        yz = np.empty((n, 2))
        in_cyl = u < p_cyl
        ncyl = int(in_cyl.sum())
        x[in_cyl] = rng.uniform(-cyl_len / 2, cyl_len / 2, size=ncyl)
        rr = radius * np.sqrt(rng.uniform(size=ncyl))
        th = rng.uniform(0, 2 * np.pi, size=ncyl)
        yz[in_cyl] = np.stack([rr * np.cos(th), rr * np.sin(th)], axis=1)
        nsph = n - ncyl
        pts = rng.normal(size=(nsph, 3))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        pts *= radius * rng.uniform(size=(nsph, 1)) ** (1.0 / 3.0)
        x[~in_cyl] = pts[:, 0] + np.sign(pts[:, 0]) * cyl_len / 2
        yz[~in_cyl] = pts[:, 1:]
        samples = np.column_stack([x, yz])
        _sample_cache[key] = samples
    return _sample_cache[key]


def inside_fraction(obj_rot, obj_pos, radius, cyl_len, receptacle=MUG_RECEPTACLE,
                    receptacle_xy=(0.0, 0.0)):
    """Monte-Carlo volume fraction of the capsule inside the receptacle."""
    samples = capsule_volume_samples(radius, cyl_len)
    world = samples @ np.asarray(obj_rot).T + np.asarray(obj_pos)
    mask = points_in_cylinder(world, receptacle_xy, receptacle["r_inner"],
                              receptacle["base"], receptacle["height"])
    return float(mask.mean())


def inside_score(obj_rot, obj_pos, radius, cyl_len, receptacle=MUG_RECEPTACLE,
                 receptacle_xy=(0.0, 0.0)):
    """Volume fraction normalized by the geometric maximum, clamped to [0, 1]."""
    frac = inside_fraction(obj_rot, obj_pos, radius, cyl_len, receptacle,
                           receptacle_xy)
    return float(np.clip(frac / MAX_INSIDE_FRACTION, 0.0, 1.0))


def analytic_capsule_below(radius, cyl_len, tip_z, plane_z):
    """Closed-form capsule volume below a horizontal plane, for a vertical
    capsule whose lower tip sits at tip_z (oracle for the MC test)."""
    def sphere_cap(h):
        h = np.clip(h, 0.0, 2 * radius)
        return np.pi * h * h * (3 * radius - h) / 3.0

    depth = plane_z - tip_z
    if depth <= 0:
        return 0.0
    v = sphere_cap(min(depth, 2 * radius))
    if depth > radius:
        v_cyl = np.pi * radius**2 * np.clip(depth - radius, 0.0, cyl_len)
        v = sphere_cap(radius) + v_cyl
        if depth > radius + cyl_len:
            extra = depth - radius - cyl_len
            v += sphere_cap(min(radius + extra, 2 * radius)) - sphere_cap(radius)
    return float(v)
