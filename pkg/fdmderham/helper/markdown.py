import math
from enum import Enum

import pandas as pd
from jinja2 import Environment, PackageLoader

CSV_SCHEMA = 'fdmderham-table v1'


class ColumnDataType(Enum):
    INT = 1
    FLOAT = 2
    SCI = 3
    STRING = 4
    BOOL = 5


def format_value(value, dtype: ColumnDataType):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return '-'
    if dtype == ColumnDataType.INT:
        return str(int(value))
    elif dtype == ColumnDataType.FLOAT:
        return f'{value:.4g}'
    elif dtype == ColumnDataType.SCI:
        return f'{value:.3e}'
    elif dtype == ColumnDataType.BOOL:
        return 'yes' if value else 'no'
    return str(value)


def columns_to_frame(columns):
    '''
    DataFrame from table columns [name, ColumnDataType, values...]
    '''
    return pd.DataFrame({c[0]: list(c[2:]) for c in columns},
                        columns=[c[0] for c in columns])


def write_csv(name, columns, path_or_buf):
    frame = columns_to_frame(columns)
    header = f'# {CSV_SCHEMA} {name}\n'
    if hasattr(path_or_buf, 'write'):
        path_or_buf.write(header)
        frame.to_csv(path_or_buf, index=False)
    else:
        with open(path_or_buf, 'w', newline='') as fh:
            fh.write(header)
            frame.to_csv(fh, index=False)
    return frame


def _rows(columns):
    nrows = max((len(c) - 2 for c in columns), default=0)
    return [[format_value(c[2 + i], c[1]) for c in columns]
            for i in range(nrows)]


def render_report(tables, title='fdmderham report', params='', messages=()):
    '''
    Markdown for a list of (title, columns) tables
    '''
    env = Environment(loader=PackageLoader('fdmderham', 'templates'))
    templ = env.get_template('table.md.j2')
    data = [dict(title=t, headers=[c[0] for c in cols], rows=_rows(cols))
            for t, cols in tables]
    return templ.render(title=title, params=params, tables=data,
                        messages=list(messages))
