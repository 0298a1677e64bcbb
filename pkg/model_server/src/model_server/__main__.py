import uvicorn

from .app import create_app
from .config import ModelConfig


def main():
    config = ModelConfig.from_env()
    uvicorn.run(create_app(config), host="0.0.0.0", port=config.port)


main()
