from ..helper.markdown import ColumnDataType
from .common import fill


def datatable(results):
    cols = [
        (['alpha', ColumnDataType.STRING], 'alpha'),
        (['beta', ColumnDataType.STRING], 'beta'),
        (['iterations', ColumnDataType.INT], 'iterations'),
        (['scaled', ColumnDataType.INT], 'scaled_iterations'),
        (['invariant', ColumnDataType.BOOL], 'invariant'),
        (['converged', ColumnDataType.BOOL], 'converged'),
    ]
    title = 'Coefficient sweep'
    if results:
        row = results[0]
        title += f" (k={row['k']}, p={row['p']}, {row['decomposition']}, {row['mesh']})"
    return title, fill(cols, results)
