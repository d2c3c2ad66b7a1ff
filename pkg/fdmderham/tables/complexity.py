from ..helper.markdown import ColumnDataType
from .common import fill


def datatable(results):
    cols = [
        (['p', ColumnDataType.INT], 'p'),
        (['dofs', ColumnDataType.INT], 'ndofs'),
        (['nnz(P)', ColumnDataType.INT], 'nnz_aux'),
        (['nnz chol', ColumnDataType.INT], 'nnz_chol'),
        (['nnz icc_sc', ColumnDataType.INT], 'nnz_icc'),
        (['nnz GLL', ColumnDataType.INT], 'nnz_gll'),
        (['flops/cycle', ColumnDataType.SCI], 'flops_cycle'),
        (['memory', ColumnDataType.SCI], 'memory_bytes'),
    ]
    return 'Vertex patch complexity', fill(cols, results)
