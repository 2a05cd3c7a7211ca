"""Generate the built-in hand model documents under src/handpipe/kinematics/models/."""

import os

FINGERS = ["thumb", "index", "middle", "ring", "pinky"]

# human bone table: base offset from wrist, yaw, pitch, (prox, mid, dist) lengths
HUMAN = {
    "thumb":  dict(base=(0.022, 0.032, -0.008), yaw=1.00, pitch=0.35,
                   lens=(0.046, 0.036, 0.029)),
    "index":  dict(base=(0.092, 0.028, 0.0), yaw=0.06, pitch=0.0,
                   lens=(0.042, 0.026, 0.023)),
    "middle": dict(base=(0.096, 0.006, 0.0), yaw=0.0, pitch=0.0,
                   lens=(0.047, 0.029, 0.025)),
    "ring":   dict(base=(0.090, -0.016, 0.0), yaw=-0.08, pitch=0.0,
                   lens=(0.043, 0.027, 0.024)),
    "pinky":  dict(base=(0.082, -0.036, 0.0), yaw=-0.15, pitch=0.0,
                   lens=(0.033, 0.021, 0.019)),
}

# robot knuckle table (slightly longer than the human bones; stand-in dimensions)
ROBOT = {
    "thumb":  dict(base=(0.024, 0.034, -0.009), yaw=1.00, pitch=0.35,
                   lens=(0.050, 0.039, 0.031)),
    "index":  dict(base=(0.098, 0.030, 0.0), yaw=0.06, pitch=0.0,
                   lens=(0.045, 0.028, 0.025)),
    "middle": dict(base=(0.102, 0.007, 0.0), yaw=0.0, pitch=0.0,
                   lens=(0.051, 0.031, 0.027)),
    "ring":   dict(base=(0.096, -0.017, 0.0), yaw=-0.08, pitch=0.0,
                   lens=(0.046, 0.029, 0.026)),
    "pinky":  dict(base=(0.036, -0.038, 0.0), yaw=-0.15, pitch=0.0,
                   meta=0.045, lens=(0.036, 0.023, 0.021)),
}


def fmt(v):
    if isinstance(v, float):
        return repr(round(v, 9))
    return str(v)


def vec(v):
    return "[" + ", ".join(fmt(float(x)) for x in v) + "]"


def link_line(name, mass, com, inertia):
    return (f"  - {{name: {name}, mass: {fmt(mass)}, com: {vec(com)}, "
            f"inertia: {vec(inertia)}}}")


def rod_inertia(mass, length, radius=0.008):
    ix = 0.5 * mass * radius**2
    iyz = mass * (length**2 / 12.0 + radius**2 / 4.0)
    return (ix, iyz, iyz)


def human_model():
    lines = ["version: 1", "name: human_hand", "", "links:"]
    lines.append(link_line("palm", 0.30, (0.04, 0, 0), (2.0e-4, 3.0e-4, 4.5e-4)))
    for f in FINGERS:
        for seg, m in zip(("prox", "mid", "dist"), (0.012, 0.010, 0.008)):
            li = rod_inertia(m, HUMAN[f]["lens"][("prox", "mid", "dist").index(seg)])
            lines.append(link_line(f"{f}_{seg}", m, (HUMAN[f]["lens"][0] / 2, 0, 0), li))
    lines += ["", "joints:"]
    lines.append("  - {name: root, kind: free, parent: world, child: palm, "
                 "origin: {xyz: [0.0, 0.0, 0.0]}, limits: [[-1.0, 1.0], [-1.0, 1.0], "
                 "[-0.2, 1.0], [-3.1, 3.1], [-3.1, 3.1], [-3.1, 3.1]]}")
    ball_lim = "[[-0.6, 0.6], [-0.7, 1.9], [-0.7, 0.7]]"
    ball_lim_distal = "[[-0.4, 0.4], [-0.4, 1.9], [-0.4, 0.4]]"
    for fi, f in enumerate(FINGERS):
        spec = HUMAN[f]
        rpy = f"[0.0, {fmt(spec['pitch'])}, {fmt(spec['yaw'])}]"
        lines.append(f"  - {{name: {f}_mcp, kind: ball, parent: palm, child: {f}_prox, "
                     f"origin: {{xyz: {vec(spec['base'])}, rpy: {rpy}}}, "
                     f"limits: {ball_lim}, shape_group: {2 * fi}}}")
        lines.append(f"  - {{name: {f}_pip, kind: ball, parent: {f}_prox, child: {f}_mid, "
                     f"origin: {{xyz: {vec((spec['lens'][0], 0, 0))}}}, "
                     f"limits: {ball_lim_distal}, shape_group: {2 * fi}}}")
        lines.append(f"  - {{name: {f}_dip, kind: ball, parent: {f}_mid, child: {f}_dist, "
                     f"origin: {{xyz: {vec((spec['lens'][1], 0, 0))}}}, "
                     f"limits: {ball_lim_distal}, shape_group: {2 * fi + 1}}}")
    lines += ["", "sites:"]
    lines.append("  - {name: wrist, link: palm, offset: [0.0, 0.0, 0.0]}")
    landmark_sites = ["wrist"]
    for fi, f in enumerate(FINGERS):
        spec = HUMAN[f]
        lines.append(f"  - {{name: {f}_mcp_site, link: {f}_prox, offset: [0.0, 0.0, 0.0]}}")
        lines.append(f"  - {{name: {f}_pip_site, link: {f}_mid, offset: [0.0, 0.0, 0.0]}}")
        lines.append(f"  - {{name: {f}_dip_site, link: {f}_dist, offset: [0.0, 0.0, 0.0]}}")
        lines.append(f"  - {{name: {f}_tip, link: {f}_dist, "
                     f"offset: {vec((spec['lens'][2], 0, 0))}, shape_group: {2 * fi + 1}}}")
        landmark_sites += [f"{f}_mcp_site", f"{f}_pip_site", f"{f}_dip_site", f"{f}_tip"]
    lines += ["", "meta:"]
    lines.append("  finger_order: [" + ", ".join(FINGERS) + "]")
    lines.append("  landmark_sites: [" + ", ".join(landmark_sites) + "]")
    lines.append("  wrist_site: wrist")
    lines.append("  tsv_proximal_sites: [" + ", ".join(f"{f}_pip_site" for f in FINGERS) + "]")
    lines.append("  tsv_tip_sites: [" + ", ".join(f"{f}_tip" for f in FINGERS) + "]")
    return "\n".join(lines) + "\n"


def robot_model():
    lines = ["version: 1", "name: robot_hand_30dof", "", "links:"]
    lines.append(link_line("base", 0.35, (-0.03, 0, 0), (2.0e-4, 3.0e-4, 3.0e-4)))
    lines.append(link_line("wrist_link", 0.15, (0, 0, 0), (5.0e-5, 8.0e-5, 8.0e-5)))
    lines.append(link_line("palm", 0.30, (0.05, 0, 0), (1.5e-4, 2.5e-4, 3.5e-4)))
    for f in ("index", "middle", "ring"):
        lens = ROBOT[f]["lens"]
        lines.append(link_line(f"{f}_knuckle", 0.008, (0, 0, 0), (5e-7, 5e-7, 5e-7)))
        lines.append(link_line(f"{f}_prox", 0.012, (lens[0] / 2, 0, 0), rod_inertia(0.012, lens[0])))
        lines.append(link_line(f"{f}_mid", 0.010, (lens[1] / 2, 0, 0), rod_inertia(0.010, lens[1])))
        lines.append(link_line(f"{f}_dist", 0.008, (lens[2] / 2, 0, 0), rod_inertia(0.008, lens[2])))
    tl = ROBOT["thumb"]["lens"]
    lines.append(link_line("thumb_base", 0.010, (0, 0, 0), (6e-7, 6e-7, 6e-7)))
    lines.append(link_line("thumb_knuckle", 0.008, (0, 0, 0), (5e-7, 5e-7, 5e-7)))
    lines.append(link_line("thumb_prox", 0.012, (tl[0] / 2, 0, 0), rod_inertia(0.012, tl[0])))
    lines.append(link_line("thumb_mid", 0.010, (tl[1] / 2, 0, 0), rod_inertia(0.010, tl[1])))
    lines.append(link_line("thumb_dist", 0.009, (tl[2] / 2, 0, 0), rod_inertia(0.009, tl[2])))
    pl = ROBOT["pinky"]["lens"]
    lines.append(link_line("pinky_meta", 0.010, (ROBOT["pinky"]["meta"] / 2, 0, 0),
                           rod_inertia(0.010, ROBOT["pinky"]["meta"])))
    lines.append(link_line("pinky_knuckle", 0.008, (0, 0, 0), (5e-7, 5e-7, 5e-7)))
    lines.append(link_line("pinky_prox", 0.010, (pl[0] / 2, 0, 0), rod_inertia(0.010, pl[0])))
    lines.append(link_line("pinky_mid", 0.008, (pl[1] / 2, 0, 0), rod_inertia(0.008, pl[1])))
    lines.append(link_line("pinky_dist", 0.007, (pl[2] / 2, 0, 0), rod_inertia(0.007, pl[2])))

    lines += ["", "joints:"]
    lines.append("  - {name: root, kind: free, parent: world, child: base, "
                 "origin: {xyz: [0.0, 0.0, 0.0]}, limits: [[-0.7, 0.7], [-0.7, 0.7], "
                 "[-0.1, 0.7], [-3.1, 3.1], [-3.1, 3.1], [-3.1, 3.1]]}")
    lines.append("  - {name: wrj1, kind: revolute, parent: base, child: wrist_link, "
                 "axis: [0.0, 1.0, 0.0], origin: {xyz: [0.0, 0.0, 0.0]}, limits: [-0.5, 0.5]}")
    lines.append("  - {name: wrj0, kind: revolute, parent: wrist_link, child: palm, "
                 "axis: [0.0, 0.0, 1.0], origin: {xyz: [0.0, 0.0, 0.0]}, limits: [-0.4, 0.4]}")
    short = {"index": "ff", "middle": "mf", "ring": "rf", "pinky": "lf", "thumb": "th"}
    for f in ("index", "middle", "ring"):
        spec = ROBOT[f]
        s = short[f]
        rpy = f"[0.0, 0.0, {fmt(spec['yaw'])}]"
        lines.append(f"  - {{name: {s}j3, kind: revolute, parent: palm, child: {f}_knuckle, "
                     f"axis: [0.0, 0.0, 1.0], origin: {{xyz: {vec(spec['base'])}, rpy: {rpy}}}, "
                     f"limits: [-0.35, 0.35]}}")
        lines.append(f"  - {{name: {s}j2, kind: revolute, parent: {f}_knuckle, child: {f}_prox, "
                     f"axis: [0.0, 1.0, 0.0], origin: {{xyz: [0.0, 0.0, 0.0]}}, "
                     f"limits: [-0.25, 1.65]}}")
        lines.append(f"  - {{name: {s}j1, kind: revolute, parent: {f}_prox, child: {f}_mid, "
                     f"axis: [0.0, 1.0, 0.0], origin: {{xyz: {vec((spec['lens'][0], 0, 0))}}}, "
                     f"limits: [-0.25, 1.8]}}")
        lines.append(f"  - {{name: {s}j0, kind: revolute, parent: {f}_mid, child: {f}_dist, "
                     f"axis: [0.0, 1.0, 0.0], origin: {{xyz: {vec((spec['lens'][1], 0, 0))}}}, "
                     f"limits: [-0.25, 1.8]}}")
    t = ROBOT["thumb"]
    rpy = f"[0.0, {fmt(t['pitch'])}, {fmt(t['yaw'])}]"
    lines.append(f"  - {{name: thj4, kind: revolute, parent: palm, child: thumb_base, "
                 f"axis: [1.0, 0.0, 0.0], origin: {{xyz: {vec(t['base'])}, rpy: {rpy}}}, "
                 f"limits: [-1.2, 1.2]}}")
    lines.append("  - {name: thj3, kind: revolute, parent: thumb_base, child: thumb_knuckle, "
                 "axis: [0.0, 0.0, 1.0], origin: {xyz: [0.0, 0.0, 0.0]}, limits: [-0.5, 0.5]}")
    lines.append("  - {name: thj2, kind: revolute, parent: thumb_knuckle, child: thumb_prox, "
                 "axis: [0.0, 1.0, 0.0], origin: {xyz: [0.0, 0.0, 0.0]}, limits: [-0.3, 1.4]}")
    lines.append(f"  - {{name: thj1, kind: revolute, parent: thumb_prox, child: thumb_mid, "
                 f"axis: [0.0, 1.0, 0.0], origin: {{xyz: {vec((tl[0], 0, 0))}}}, "
                 f"limits: [-0.3, 1.6]}}")
    lines.append(f"  - {{name: thj0, kind: revolute, parent: thumb_mid, child: thumb_dist, "
                 f"axis: [0.0, 1.0, 0.0], origin: {{xyz: {vec((tl[1], 0, 0))}}}, "
                 f"limits: [-0.3, 1.7]}}")
    p = ROBOT["pinky"]
    rpy = f"[0.0, 0.0, {fmt(p['yaw'])}]"
    lines.append(f"  - {{name: lfj4, kind: revolute, parent: palm, child: pinky_meta, "
                 f"axis: [0.0, 1.0, 0.0], origin: {{xyz: {vec(p['base'])}, rpy: {rpy}}}, "
                 f"limits: [-0.1, 0.7]}}")
    lines.append(f"  - {{name: lfj3, kind: revolute, parent: pinky_meta, child: pinky_knuckle, "
                 f"axis: [0.0, 0.0, 1.0], origin: {{xyz: {vec((p['meta'], 0, 0))}}}, "
                 f"limits: [-0.35, 0.35]}}")
    lines.append("  - {name: lfj2, kind: revolute, parent: pinky_knuckle, child: pinky_prox, "
                 "axis: [0.0, 1.0, 0.0], origin: {xyz: [0.0, 0.0, 0.0]}, limits: [-0.25, 1.65]}")
    lines.append(f"  - {{name: lfj1, kind: revolute, parent: pinky_prox, child: pinky_mid, "
                 f"axis: [0.0, 1.0, 0.0], origin: {{xyz: {vec((pl[0], 0, 0))}}}, "
                 f"limits: [-0.25, 1.8]}}")
    lines.append(f"  - {{name: lfj0, kind: revolute, parent: pinky_mid, child: pinky_dist, "
                 f"axis: [0.0, 1.0, 0.0], origin: {{xyz: {vec((pl[1], 0, 0))}}}, "
                 f"limits: [-0.25, 1.8]}}")

    lines += ["", "sites:"]
    lines.append("  - {name: wrist, link: base, offset: [0.0, 0.0, 0.0]}")
    for f in FINGERS:
        lens = ROBOT[f]["lens"]
        lines.append(f"  - {{name: {f}_proximal, link: {f}_mid, offset: [0.0, 0.0, 0.0]}}")
        lines.append(f"  - {{name: {f}_tip, link: {f}_dist, offset: {vec((lens[2], 0, 0))}}}")

    lines += ["", "servo:", "  kp: 2500.0", "  kd: 100.0", "", "meta:"]
    lines.append("  finger_order: [" + ", ".join(FINGERS) + "]")
    lines.append("  wrist_site: wrist")
    lines.append("  tsv_proximal_sites: [" + ", ".join(f"{f}_proximal" for f in FINGERS) + "]")
    lines.append("  tsv_tip_sites: [" + ", ".join(f"{f}_tip" for f in FINGERS) + "]")
    # route each robot finger joint from one human ball-joint component:
    # [finger_index, joint_index (0=mcp 1=pip 2=dip), component (0=x twist, 1=y flex, 2=z abd)]
    lines.append("  linear_map:")
    routes = {
        "thj4": (0, 0, 0), "thj3": (0, 0, 2), "thj2": (0, 0, 1),
        "thj1": (0, 1, 1), "thj0": (0, 2, 1),
        "ffj3": (1, 0, 2), "ffj2": (1, 0, 1), "ffj1": (1, 1, 1), "ffj0": (1, 2, 1),
        "mfj3": (2, 0, 2), "mfj2": (2, 0, 1), "mfj1": (2, 1, 1), "mfj0": (2, 2, 1),
        "rfj3": (3, 0, 2), "rfj2": (3, 0, 1), "rfj1": (3, 1, 1), "rfj0": (3, 2, 1),
        "lfj4": (4, 0, 0), "lfj3": (4, 0, 2), "lfj2": (4, 0, 1),
        "lfj1": (4, 1, 1), "lfj0": (4, 2, 1),
    }
    for name, (fi, ji, ci) in routes.items():
        lines.append(f"    {name}: [{fi}, {ji}, {ci}]")
    return "\n".join(lines) + "\n"


def main():
    out = os.path.join(os.path.dirname(__file__), "..", "src", "handpipe",
                       "kinematics", "models")
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "human_hand.yaml"), "w", encoding="utf-8") as fh:
        fh.write(human_model())
    with open(os.path.join(out, "robot_hand_30dof.yaml"), "w", encoding="utf-8") as fh:
        fh.write(robot_model())
    print("models written to", os.path.abspath(out))


if __name__ == "__main__":
    main()
