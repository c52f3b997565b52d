'''
Report and table writers.

Output must be byte-identical between runs with the same flags, so JSON keys
are sorted, CSV floats always carry 17 significant digits, and every line
ends in a bare '\n' whatever the platform.

'''

import csv
import io
import json
import math

import numpy as np

from .errors import InvalidInput

FORMATS = ('json', 'csv')


def format_float(value):
    return format(float(value), '.17g')


def _plain(value):
    """numpy scalars and arrays as JSON-ready Python objects."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def anchor_entry(anchor, max_residual, verdict):
    return {'anchor': anchor, 'max_residual': max_residual, 'verdict': verdict}


def report_document(command, config, anchors, verdict, columns=None, rows=None):
    document = {
        'command': command,
        'config': config,
        'anchors': list(anchors),
        'verdict': verdict,
    }
    if columns is not None:
        document['columns'] = list(columns)
        document['rows'] = rows
    return document


def render_json(document):
    return json.dumps(_plain(document), sort_keys=True, indent=2) + '\n'


def render_csv(columns, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v
                         for v in row])
    return buffer.getvalue()


def render_anchors_csv(anchors):
    return render_csv(('anchor', 'max_residual', 'verdict'),
                      ([a['anchor'], a['max_residual'], a['verdict']] for a in anchors))


def render(document, fmt):
    """The document in ``fmt``; CSV carries the table if there is one, else the anchors."""
    if fmt == 'json':
        return render_json(document)
    if fmt == 'csv':
        if 'columns' in document:
            return render_csv(document['columns'], document['rows'])
        return render_anchors_csv(document['anchors'])
    raise InvalidInput(f'unknown format {fmt!r}, expected one of {FORMATS}')


def write_text(text, path):
    with open(path, 'w', encoding='utf-8', newline='') as fh:
        fh.write(text)
