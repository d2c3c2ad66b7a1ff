def fill(cols, results):
    '''
    Appends the row values of every column key to the columns
    '''
    for row in results:
        for col, key in cols:
            col.append(row.get(key))
    return [col for col, _ in cols]
