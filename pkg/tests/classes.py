from zebra import errors
from zebra.closed_trails import HomotopyClass, canonical_loop, short_dual_cycles


def distinct_classes(surf, count, max_len=8):
    """The first ``count`` valid classes among short dual cycles, one per loop."""
    seen, out = set(), []
    for seed, loop in short_dual_cycles(surf, max_len):
        try:
            cls = HomotopyClass.from_loop(surf, seed, loop)
        except errors.InputError:
            continue
        key = canonical_loop(cls.loop)
        if key in seen:
            continue
        seen.add(key)
        out.append(cls)
        if len(out) == count:
            break
    return out
