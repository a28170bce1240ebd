"""Label an oscillation by how the participating machines split into two coherent groups."""
from dataclasses import dataclass, field
import cmath
import math

LABELS = ("intra-area", "inter-area", "cross-area", "local/other")


@dataclass
class GroupingLabel:
    label: str
    group_a: list = field(default_factory=list)
    group_b: list = field(default_factory=list)
    angles_deg: dict = field(default_factory=dict)
    magnitudes: dict = field(default_factory=dict)

    def __post_init__(self):
        if set(self.group_a) & set(self.group_b):
            raise ValueError("groups must be disjoint")


def classify_grouping(shapes, area_map, mag_threshold=0.2):
    """Split machines above ``mag_threshold`` (relative) by angle to the largest component (±90°)."""
    if not shapes:
        return GroupingLabel("local/other")
    ref_id = max(shapes, key=lambda k: (abs(shapes[k]), str(k)))
    ref = shapes[ref_id]
    if ref == 0:
        return GroupingLabel("local/other")
    mags, angles = {}, {}
    for k, v in shapes.items():
        rel = v / ref
        mags[k] = abs(rel)
        angles[k] = math.degrees(cmath.phase(rel))
    active = sorted((k for k in shapes if mags[k] >= mag_threshold), key=str)
    a = [k for k in active if abs(angles[k]) <= 90.0]
    b = [k for k in active if abs(angles[k]) > 90.0]
    act_mags = {k: mags[k] for k in active}
    act_angles = {k: angles[k] for k in active}
    if len(active) < 2:
        return GroupingLabel("local/other", a, b, act_angles, act_mags)
    areas_a = {area_map[k] for k in a}
    areas_b = {area_map[k] for k in b}
    if len(areas_a | areas_b) == 1:
        label = "intra-area"
    elif not a or not b:
        label = "local/other"
    elif len(areas_a) == 1 and len(areas_b) == 1 and areas_a != areas_b:
        label = "inter-area"
    elif len(areas_a) > 1 or len(areas_b) > 1:
        label = "cross-area"
    else:
        label = "local/other"
    return GroupingLabel(label, a, b, act_angles, act_mags)
