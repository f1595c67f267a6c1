"""
Web access for termweb

CGI form input, HTTP URLs and an HTTP/1.0 client.
"""

# CGI forms
from .forms import (
    EMPTY,
    CgiEnv,
    EmptyValue,
    FormDict,
    Lines,
    Number,
    RequestMethod,
    Token,
    form_default,
    form_empty_value,
    form_request_method,
    get_form_input,
    get_form_value,
    my_url,
    url_query,
)

# URLs
from .urls import UrlInfo, url_info, url_info_relative, url_text

# HTTP client
from .http_client import (
    Head,
    HttpDate,
    IfModifiedSince,
    RequestTimeout,
    StatusClass,
    fetch,
    fetch_url,
    format_http_date,
    parse_http_date,
    response_param,
    status_class,
)

__all__ = [
    # Forms
    'EMPTY',
    'CgiEnv',
    'EmptyValue',
    'FormDict',
    'Lines',
    'Number',
    'RequestMethod',
    'Token',
    'form_default',
    'form_empty_value',
    'form_request_method',
    'get_form_input',
    'get_form_value',
    'my_url',
    'url_query',

    # URLs
    'UrlInfo',
    'url_info',
    'url_info_relative',
    'url_text',

    # HTTP
    'Head',
    'HttpDate',
    'IfModifiedSince',
    'RequestTimeout',
    'StatusClass',
    'fetch',
    'fetch_url',
    'format_http_date',
    'parse_http_date',
    'response_param',
    'status_class',
]
