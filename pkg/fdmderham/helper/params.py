def paramval2str(name, value):
    if value is None:  # catch None value early here!
        return str(value)
    elif isinstance(value, bool):
        return 'yes' if value else 'no'
    elif isinstance(value, float):
        return f'{value:g}'
    elif isinstance(value, (list, tuple)):
        return ','.join(paramval2str(name, v) for v in value)
    elif isinstance(value, type):
        return value.__name__
    else:
        return str(value)


def get_nondefault_params(config):
    return config.non_default()


def get_params_str(config):
    user_params = get_nondefault_params(config)
    plabs = [f'{x}: {paramval2str(x, y)}' for x, y in user_params.items()]
    plabs = '/'.join(plabs)
    return plabs
