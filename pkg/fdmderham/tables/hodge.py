from ..helper.markdown import ColumnDataType
from .common import fill


def datatable(results):
    cols = [
        (['k', ColumnDataType.INT], 'k'),
        (['p', ColumnDataType.INT], 'p'),
        (['level', ColumnDataType.INT], 'level'),
        (['mesh', ColumnDataType.STRING], 'mesh'),
        (['iterations', ColumnDataType.INT], 'iterations'),
        (['converged', ColumnDataType.BOOL], 'converged'),
        (['nnz', ColumnDataType.INT], 'nnz_total'),
        (['flops', ColumnDataType.SCI], 'flops'),
    ]
    return 'MINRES iteration counts for the mixed Hodge Laplacian', fill(cols, results)
