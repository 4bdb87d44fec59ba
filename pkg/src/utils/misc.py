"""Miscellaneous helper functions"""


import hashlib
import os
from jinja2 import Environment, StrictUndefined


TEMPLATE_DIRECTORY = os.path.join(os.path.dirname(os.path.dirname(__file__)), 'templates')


def fixed6(value):
    """Formats a number with exactly six decimals."""
    return f'{float(value):.6f}'


def read_text_file(text_file):
    """Read a UTF-8 text file into a string.

    Parameters
    ----------
    text_file : str
        Path to the text file

    Returns
    -------
    text : str
        File contents

    """

    with open(text_file, 'r', encoding='utf-8') as myfile:
        text = myfile.read()
    return text


def render_template(template, parameters):
    """Substitutes template placeholders with values

    Parameters
    ----------
    template : str
        Raw template string which contains placeholders,
        e.g. {{bleu | fixed6}}, {{sentence.id | tojson}}

    parameters : dict
        Dictionary of parameter-value pairs to substitute to the placeholders
        in the raw template.

    Returns
    -------
    rendered_template : str

    """

    environment = Environment(undefined=StrictUndefined, keep_trailing_newline=True)
    environment.filters['fixed6'] = fixed6
    rendered_template = environment.from_string(template).render(parameters)

    return rendered_template


def render_template_file(template_name, parameters):
    """Renders one of the templates shipped in ``src/templates``."""
    return render_template(read_text_file(os.path.join(TEMPLATE_DIRECTORY, template_name)), parameters)


def prepare_directory(file_path):
    """Creates the directory given a file path if it does not exist yet.

    Parameters
    ----------
    file_path : str
        The full path to a file or directory. The function extracts the
        directory path from this and creates it as needed.

    Returns
    -------
    None

    """

    # Extract the directory path from the file_path
    directory = os.path.dirname(file_path)

    # Check if the directory exists; if not, create it
    if directory and not os.path.exists(directory):
        os.makedirs(directory)


def file_digest(file_path):
    """SHA-256 hex digest of a file's bytes."""
    digest = hashlib.sha256()
    with open(file_path, 'rb') as f:
        for chunk in iter(lambda: f.read(1 << 16), b''):
            digest.update(chunk)
    return digest.hexdigest()
