# rf-overshoot lab package
