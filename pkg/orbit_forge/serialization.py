import json
import math
from typing import Any

import numpy as np
import pandas as pd


class JSONEncoder(json.JSONEncoder):
    """JSON encoder for numpy, pandas and complex values"""
    def default(self, obj):
        if hasattr(obj, 'to_dict') and not isinstance(obj, (pd.Series, pd.DataFrame)):
            return obj.to_dict()
        elif isinstance(obj, pd.DataFrame):
            return obj.to_dict(orient='records')
        elif isinstance(obj, pd.Series):
            return obj.to_dict()
        elif isinstance(obj, (complex, np.complexfloating)):
            return [float(obj.real), float(obj.imag)]
        elif isinstance(obj, np.ndarray):
            if np.iscomplexobj(obj):
                return np.stack([obj.real, obj.imag], axis=-1).tolist()
            return obj.tolist()
        elif isinstance(obj, np.bool_):
            return bool(obj)
        elif hasattr(obj, 'item'):  # numpy scalars
            return obj.item()
        return super().default(obj)


def _scrub(value: Any) -> Any:
    # NaN/inf are not valid JSON
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _scrub(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_scrub(v) for v in value]
    return value


def dumps(obj: Any) -> str:
    """Deterministic JSON document: stable key order, no timestamps."""
    plain = json.loads(json.dumps(obj, cls=JSONEncoder))
    return json.dumps(_scrub(plain), indent=2, allow_nan=False)
