from ..helper.markdown import ColumnDataType
from .common import fill


def datatable(results):
    cols = [
        (['k', ColumnDataType.INT], 'k'),
        (['p', ColumnDataType.INT], 'p'),
        (['level', ColumnDataType.INT], 'level'),
        (['mesh', ColumnDataType.STRING], 'mesh'),
        (['decomposition', ColumnDataType.STRING], 'decomposition'),
        (['factorization', ColumnDataType.STRING], 'factorization'),
        (['alpha', ColumnDataType.STRING], 'alpha'),
        (['beta', ColumnDataType.STRING], 'beta'),
        (['iterations', ColumnDataType.INT], 'iterations'),
        (['converged', ColumnDataType.BOOL], 'converged'),
        (['nnz', ColumnDataType.INT], 'nnz_total'),
        (['flops', ColumnDataType.SCI], 'flops'),
        (['memory', ColumnDataType.SCI], 'memory_bytes'),
    ]
    return 'CG iteration counts', fill(cols, results)
