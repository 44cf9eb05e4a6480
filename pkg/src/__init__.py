# liftcoc - Source Package
