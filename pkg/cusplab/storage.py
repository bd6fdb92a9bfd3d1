"""
Text persistence: grid functions (.gfn), masks (.gfm run-length), provenance
sidecars (.prov) and versioned experiment CSV files
"""
import configparser
import csv
import logging

import numpy as np

from cusplab.errors import GfnFormatError
from cusplab.lattice import GridFunction, Lattice

GFN_MAGIC = 'gfn 1'
MASK_MAGIC = 'gfm 1'
CSV_SCHEMA_VERSION = 1

log = logging.getLogger('cusplab.storage')


def _parse_float(token):
    if 'x' in token.lower():
        return float.fromhex(token)
    return float(token)


def _header_lines(lattice, magic):
    return [magic,
            'dim {}'.format(lattice.dim),
            'shape {}'.format(' '.join(str(n) for n in lattice.shape)),
            'origin {}'.format(' '.join(float(o).hex() for o in lattice.origin)),
            'spacing {}'.format(float(lattice.spacing).hex())]


def _read_header(path, lines, magic):
    def field(lineno, name, conv, count):
        if len(lines) < lineno:
            raise GfnFormatError(path, lineno, 'missing "{}" line'.format(name))
        tokens = lines[lineno - 1].split()
        if not tokens or tokens[0] != name:
            raise GfnFormatError(path, lineno, 'expected "{}", got "{}"'.format(name, lines[lineno - 1].strip()))
        if len(tokens) - 1 != count:
            raise GfnFormatError(path, lineno, '{} takes {} value(s), got {}'.format(name, count, len(tokens) - 1))
        try:
            return [conv(t) for t in tokens[1:]]
        except ValueError:
            raise GfnFormatError(path, lineno, 'malformed {} "{}"'.format(name, ' '.join(tokens[1:])))

    if not lines or lines[0].strip() != magic:
        raise GfnFormatError(path, 1, 'expected "{}" header'.format(magic))
    dim = field(2, 'dim', int, 1)[0]
    if dim < 1:
        raise GfnFormatError(path, 2, 'dim must be positive')
    shape = field(3, 'shape', int, dim)
    origin = field(4, 'origin', _parse_float, dim)
    spacing = field(5, 'spacing', _parse_float, 1)[0]
    try:
        return Lattice(shape, origin, spacing)
    except Exception as exc:
        raise GfnFormatError(path, 3, str(exc))


def write_gfn(path, f):
    """Write a grid function as hexadecimal floats, one per line in row-major order"""
    lines = _header_lines(f.lattice, GFN_MAGIC)
    lines.extend(float(v).hex() for v in f.values.ravel(order='C'))
    with open(path, 'w', encoding='utf-8') as out:
        out.write('\n'.join(lines))
        out.write('\n')
    log.debug('wrote {} ({} values)'.format(path, f.values.size))


def read_gfn(path):
    with open(path, encoding='utf-8') as f:
        lines = f.read().splitlines()
    lattice = _read_header(path, lines, GFN_MAGIC)
    body = lines[5:]
    if len(body) < lattice.size:
        raise GfnFormatError(path, len(lines) + 1, 'expected {} values, found {}'.format(lattice.size, len(body)))
    values = np.empty(lattice.size)
    for i in range(lattice.size):
        try:
            values[i] = _parse_float(body[i].strip())
        except ValueError:
            raise GfnFormatError(path, i + 6, 'malformed value "{}"'.format(body[i].strip()))
    for extra, line in enumerate(body[lattice.size:]):
        if line.strip():
            raise GfnFormatError(path, lattice.size + extra + 6, 'trailing data after values')
    try:
        return GridFunction(lattice, values)
    except Exception as exc:
        raise GfnFormatError(path, 6, str(exc))


def write_mask(path, lattice, bits):
    """Run-length encoded node mask: pairs '<bit> <count>' in row-major order"""
    flat = np.asarray(bits, dtype=bool).ravel(order='C')
    lines = _header_lines(lattice, MASK_MAGIC)
    start = 0
    while start < flat.size:
        value = flat[start]
        stop = start
        while stop < flat.size and flat[stop] == value:
            stop += 1
        lines.append('{} {}'.format(int(value), stop - start))
        start = stop
    with open(path, 'w', encoding='utf-8') as out:
        out.write('\n'.join(lines))
        out.write('\n')


def read_mask(path):
    with open(path, encoding='utf-8') as f:
        lines = f.read().splitlines()
    lattice = _read_header(path, lines, MASK_MAGIC)
    runs = []
    total = 0
    for offset, line in enumerate(lines[5:]):
        if not line.strip():
            continue
        tokens = line.split()
        if len(tokens) != 2 or tokens[0] not in ('0', '1') or not tokens[1].isdigit():
            raise GfnFormatError(path, offset + 6, 'malformed run "{}"'.format(line.strip()))
        runs.append((tokens[0] == '1', int(tokens[1])))
        total += int(tokens[1])
    if total != lattice.size:
        raise GfnFormatError(path, len(lines), 'runs cover {} nodes, lattice has {}'.format(total, lattice.size))
    flat = np.concatenate([np.full(count, bit, dtype=bool) for bit, count in runs])
    return lattice, flat.reshape(lattice.shape)


def write_provenance(path, provenance, certification=None):
    """Sidecar record (generator, params, seed, certification levels) as key-value text"""
    parser = configparser.ConfigParser()
    parser.optionxform = str
    parser['provenance'] = dict((k, str(v)) for k, v in sorted(provenance.items()))
    if certification:
        parser['certification'] = dict((k, str(v)) for k, v in sorted(certification.items()))
    with open(path, 'w', encoding='utf-8') as out:
        parser.write(out)


def read_provenance(path):
    parser = configparser.ConfigParser()
    parser.optionxform = str
    with open(path, encoding='utf-8') as f:
        parser.read_file(f)
    provenance = dict(parser.items('provenance')) if parser.has_section('provenance') else {}
    certification = dict(parser.items('certification')) if parser.has_section('certification') else {}
    return provenance, certification


def format_cell(value):
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (list, tuple)):
        return ' '.join(format_cell(v) for v in value)
    if value is None:
        return ''
    return str(value)


def write_csv(path, name, columns, rows):
    """CSV with a versioned schema comment followed by the header row"""
    with open(path, 'w', encoding='utf-8', newline='') as out:
        out.write('# cusplab {} schema v{}\n'.format(name, CSV_SCHEMA_VERSION))
        writer = csv.writer(out, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_cell(row.get(c)) for c in columns])


def read_csv(path):
    with open(path, encoding='utf-8', newline='') as f:
        lines = [line for line in f if not line.startswith('#')]
    reader = csv.DictReader(lines)
    return list(reader)
