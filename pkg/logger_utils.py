import logging
import os
from datetime import datetime
from typing import Optional, Any
import json
from functools import wraps
import traceback

import numpy as np
import psutil

# Create logs directory if it doesn't exist
LOG_DIR = os.getenv("SNN_LOG_DIR", "logs")
if not os.path.exists(LOG_DIR):
    os.makedirs(LOG_DIR, exist_ok=True)

# Configure the logger
logger = logging.getLogger('snn_compress')
logger.setLevel(logging.DEBUG)

if not logger.handlers:
    # Create a file handler that logs everything to a daily rotating file
    log_file = os.path.join(LOG_DIR, f'snn_compress_{datetime.now().strftime("%Y%m%d")}.log')
    file_handler = logging.FileHandler(log_file, encoding='utf-8')
    file_handler.setLevel(logging.DEBUG)

    # Create a console handler with a higher log level
    console_handler = logging.StreamHandler()
    console_handler.setLevel(logging.INFO)

    # Create a formatter
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    file_handler.setFormatter(formatter)
    console_handler.setFormatter(formatter)

    # Add the handlers to the logger
    logger.addHandler(file_handler)
    logger.addHandler(console_handler)


def memory_usage_mb() -> float:
    """Resident memory of the current process in MB."""
    return psutil.Process(os.getpid()).memory_info().rss / (1024 * 1024)


def summarize(value: Any) -> Any:
    """
    Reduce an argument to something small enough to log.

    Arrays become their shape and dtype, objects exposing ``describe()``
    (networks, datasets) log that description, containers are summarised
    element by element.
    """
    if isinstance(value, np.ndarray):
        return f"ndarray{tuple(value.shape)}:{value.dtype}"
    if hasattr(value, "describe") and callable(value.describe):
        return value.describe()
    if isinstance(value, (list, tuple)):
        if len(value) > 8:
            return f"{type(value).__name__}[{len(value)}]"
        return [summarize(v) for v in value]
    if isinstance(value, dict):
        return {str(k): summarize(v) for k, v in value.items()}
    if isinstance(value, (int, float, str, bool)) or value is None:
        return value
    return type(value).__name__


def log_operation(operation_type: str, details: Optional[dict] = None, error: Optional[Exception] = None) -> None:
    """
    Log an operation with its details and any errors.

    Args:
        operation_type (str): Type of operation (e.g., 'train', 'admm_prune', 'save_checkpoint')
        details (dict, optional): Dictionary containing operation details
        error (Exception, optional): Exception if operation failed
    """
    try:
        log_entry = {
            'timestamp': datetime.now().isoformat(),
            'operation': operation_type,
            'status': 'error' if error else 'success',
            'rss_mb': round(memory_usage_mb(), 1),
        }

        if details:
            log_entry['details'] = details

        if error:
            log_entry['error'] = {
                'type': type(error).__name__,
                'message': str(error),
                'traceback': traceback.format_exc()
            }

        # Log as JSON for better structure
        if error:
            logger.error(json.dumps(log_entry, indent=2, default=str))
        else:
            logger.debug(json.dumps(log_entry, indent=2, default=str))

    except Exception as e:
        # Fallback logging if JSON serialization fails
        logger.error(f"Failed to log operation {operation_type}: {str(e)}")


def log_decorator(operation_type: str):
    """
    Decorator to automatically log function calls.

    Args:
        operation_type (str): Type of operation being performed
    """
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            details = {
                'function': func.__name__,
                'args': summarize(list(args)),
                'kwargs': summarize(kwargs)
            }

            started = datetime.now()
            try:
                result = func(*args, **kwargs)
                details['result'] = summarize(result)
                details['seconds'] = round((datetime.now() - started).total_seconds(), 3)
                log_operation(operation_type, details)
                return result

            except Exception as e:
                log_operation(operation_type, details, error=e)
                raise

        return wrapper
    return decorator
